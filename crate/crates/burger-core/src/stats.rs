//! Mergeable running moments and jackknife errors.

use serde::Serialize;

/// Welford accumulator for one variable.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = (self.n + o.n) as f64;
        let delta = o.mean - self.mean;
        self.mean += delta * o.n as f64 / n;
        self.m2 += o.m2 + delta * delta * self.n as f64 * o.n as f64 / n;
        self.n += o.n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Bivariate accumulator: both marginals and the co-moment.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct CoMoments {
    pub x: Moments,
    pub y: Moments,
    c: f64,
}

impl CoMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64, y: f64) {
        let dx = x - self.x.mean;
        self.x.push(x);
        self.y.push(y);
        self.c += dx * (y - self.y.mean);
    }

    pub fn merge(&mut self, o: &CoMoments) {
        if o.x.n == 0 {
            return;
        }
        if self.x.n == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.x.n as f64, o.x.n as f64);
        let dx = o.x.mean - self.x.mean;
        let dy = o.y.mean - self.y.mean;
        self.c += o.c + dx * dy * na * nb / (na + nb);
        self.x.merge(&o.x);
        self.y.merge(&o.y);
    }

    pub fn n(&self) -> u64 {
        self.x.n
    }

    pub fn covariance(&self) -> f64 {
        if self.x.n < 2 {
            f64::NAN
        } else {
            self.c / (self.x.n - 1) as f64
        }
    }

    pub fn correlation(&self) -> f64 {
        self.covariance() / (self.x.variance() * self.y.variance()).sqrt()
    }
}

/// Delete-one-group jackknife of a statistic over `groups` contiguous groups.
/// Returns (full-sample estimate, standard error).
pub fn jackknife<T, F>(data: &[T], groups: usize, stat: F) -> (f64, f64)
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    let full = stat(data);
    let g = groups.min(data.len());
    if g < 2 {
        return (full, f64::NAN);
    }
    let bounds: Vec<usize> = (0..=g).map(|k| k * data.len() / g).collect();
    let mut leave = Vec::with_capacity(g);
    for k in 0..g {
        let mut rest: Vec<T> = Vec::with_capacity(data.len());
        rest.extend_from_slice(&data[..bounds[k]]);
        rest.extend_from_slice(&data[bounds[k + 1]..]);
        leave.push(stat(&rest));
    }
    let mean = leave.iter().sum::<f64>() / g as f64;
    let var = leave.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
    (full, var.sqrt())
}

/// Jackknife over pre-aggregated groups: each leave-one-out estimate merges
/// the remaining groups.
pub fn jackknife_merged<A, M, F>(parts: &[A], merge: M, stat: F) -> (f64, f64)
where
    A: Clone + Default,
    M: Fn(&mut A, &A),
    F: Fn(&A) -> f64,
{
    let mut all = A::default();
    for p in parts {
        merge(&mut all, p);
    }
    let full = stat(&all);
    let g = parts.len();
    if g < 2 {
        return (full, f64::NAN);
    }
    let leave: Vec<f64> = (0..g)
        .map(|k| {
            let mut acc = A::default();
            for (i, p) in parts.iter().enumerate() {
                if i != k {
                    merge(&mut acc, p);
                }
            }
            stat(&acc)
        })
        .collect();
    let mean = leave.iter().sum::<f64>() / g as f64;
    let var = leave.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
    (full, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass() {
        let xs = [1.0, 4.0, -2.0, 8.5, 3.0];
        let m: Moments = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((m.mean - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_is_concatenation() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let ys: Vec<f64> = (0..50).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let mut a = CoMoments::new();
        let mut b = CoMoments::new();
        let mut all = CoMoments::new();
        for i in 0..50 {
            all.push(xs[i], ys[i]);
            if i < 17 {
                a.push(xs[i], ys[i]);
            } else {
                b.push(xs[i], ys[i]);
            }
        }
        a.merge(&b);
        assert!((a.covariance() - all.covariance()).abs() < 1e-10);
        assert!((a.x.variance() - all.x.variance()).abs() < 1e-10);
        assert!((a.y.mean - all.y.mean).abs() < 1e-12);
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let xs: Vec<f64> = (0..40).map(|i| (i % 9) as f64).collect();
        let (est, se) = jackknife(&xs, 40, |d| d.iter().sum::<f64>() / d.len() as f64);
        let m: Moments = xs.iter().copied().collect();
        assert!((est - m.mean).abs() < 1e-12);
        assert!((se - m.std_err()).abs() < 1e-10);
    }

    #[test]
    fn merged_jackknife_agrees_with_plain() {
        let xs: Vec<f64> = (0..60).map(|i| ((i * 7) % 13) as f64).collect();
        let parts: Vec<Moments> = xs.chunks(6).map(|c| c.iter().copied().collect()).collect();
        let a = jackknife(&xs, 10, |d| d.iter().copied().collect::<Moments>().variance());
        let b = jackknife_merged(&parts, |acc: &mut Moments, p| acc.merge(p), |m| m.variance());
        assert!((a.0 - b.0).abs() < 1e-10);
        assert!((a.1 - b.1).abs() < 1e-10);
    }

    #[test]
    fn degenerate_single_value() {
        let m: Moments = [2.0].into_iter().collect();
        assert!(m.variance().is_nan());
    }
}
