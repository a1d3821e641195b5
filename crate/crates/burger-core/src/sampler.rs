//! Parameter vectors and seeded i.i.d. symbol streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbol::Symbol;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("probability {name}={value} outside [0,1]")]
    Range { name: &'static str, value: f64 },
    #[error("p_FO + p_SO = {0} exceeds 1")]
    OrderSum(f64),
    #[error("p_DB + p_EB = {0} must be below 1")]
    BurgerSum(f64),
    #[error("need y >= 0 and z > 0, got y={y}, z={z}")]
    Activity { y: f64, z: f64 },
}

/// (p_FO, p_SO, p_DB, p_EB).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub pf: f64,
    pub ps: f64,
    pub pd: f64,
    pub pe: f64,
}

/// Activity weights (y, z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityParams {
    pub y: f64,
    pub z: f64,
}

impl ParamVector {
    pub fn new(pf: f64, ps: f64, pd: f64, pe: f64) -> Result<Self, ParamError> {
        let p = ParamVector { pf, ps, pd, pe };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [("pf", self.pf), ("ps", self.ps), ("pd", self.pd), ("pe", self.pe)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::Range { name, value });
            }
        }
        if self.pf + self.ps > 1.0 + 1e-12 {
            return Err(ParamError::OrderSum(self.pf + self.ps));
        }
        if self.pd + self.pe >= 1.0 {
            return Err(ParamError::BurgerSum(self.pd + self.pe));
        }
        Ok(())
    }

    pub fn zero() -> Self {
        ParamVector { pf: 0.0, ps: 0.0, pd: 0.0, pe: 0.0 }
    }

    /// Symbol masses indexed by `Symbol::index`.
    pub fn probabilities(&self) -> Result<[f64; 8], ParamError> {
        self.validate()?;
        let o = (1.0 - self.pf - self.ps).max(0.0) / 4.0;
        let b = (1.0 - self.pd - self.pe) / 4.0;
        Ok([b, b, o, o, self.pf / 2.0, self.ps / 2.0, self.pd / 2.0, self.pe / 2.0])
    }

    /// Swap in the section-3 names: p = p_SO, q = p_DB.
    pub fn stale_duplicate(p: f64, q: f64) -> Result<Self, ParamError> {
        Self::new(0.0, p, q, 0.0)
    }
}

/// One-sided parameter vector realising (y, z).
pub fn params_from_yz(a: ActivityParams) -> Result<ParamVector, ParamError> {
    let ActivityParams { y, z } = a;
    if !(y >= 0.0 && z > 0.0) || !y.is_finite() || !z.is_finite() {
        return Err(ParamError::Activity { y, z });
    }
    let (pf, ps) = if y <= 1.0 { (0.0, (1.0 - y) / (1.0 + y)) } else { ((y - 1.0) / (1.0 + y), 0.0) };
    let (pd, pe) = if z <= 1.0 { (0.0, (1.0 - z) / (1.0 + z)) } else { ((z - 1.0) / (1.0 + z), 0.0) };
    ParamVector::new(pf, ps, pd, pe)
}

pub fn yz_from_params(p: ParamVector) -> Result<ActivityParams, ParamError> {
    p.validate()?;
    Ok(ActivityParams {
        y: (1.0 + p.pf - p.ps) / (1.0 - p.pf + p.ps),
        z: (1.0 + p.pd - p.pe) / (1.0 - p.pd + p.pe),
    })
}

/// Cumulative u64 thresholds over the positive-mass symbols.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    thresholds: Vec<(u64, Symbol)>,
}

impl SymbolTable {
    pub fn new(p: &ParamVector) -> Result<Self, ParamError> {
        let probs = p.probabilities()?;
        let mut thresholds = Vec::new();
        let mut cum = 0.0f64;
        for s in Symbol::ALL {
            let m = probs[s.index()];
            if m <= 0.0 {
                continue;
            }
            cum += m;
            let t = if cum >= 1.0 { u64::MAX } else { (cum * 18446744073709551616.0) as u64 };
            thresholds.push((t, s));
        }
        if let Some(last) = thresholds.last_mut() {
            last.0 = u64::MAX;
        }
        Ok(SymbolTable { thresholds })
    }

    #[inline]
    pub fn lookup(&self, u: u64) -> Symbol {
        for &(t, s) in &self.thresholds {
            if u < t {
                return s;
            }
        }
        self.thresholds[self.thresholds.len() - 1].1
    }

    /// Symbols with positive mass.
    pub fn support(&self) -> Vec<Symbol> {
        self.thresholds.iter().map(|e| e.1).collect()
    }
}

/// Reproducible stream: a ChaCha8 generator keyed by (seed, stream id).
#[derive(Clone, Debug)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    table: SymbolTable,
    seed: u64,
    stream_id: u64,
    position: u64,
}

impl SeededStream {
    pub fn new(p: &ParamVector, seed: u64, stream_id: u64) -> Result<Self, ParamError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Ok(SeededStream {
            rng,
            table: SymbolTable::new(p)?,
            seed,
            stream_id,
            position: 0,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Symbols drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    #[inline]
    pub fn next_symbol(&mut self) -> Symbol {
        self.position += 1;
        self.table.lookup(self.rng.next_u64())
    }

    /// Fair coin from the same generator.
    #[inline]
    pub fn coin(&mut self) -> bool {
        self.rng.gen::<bool>()
    }

    pub fn take(&mut self, n: usize) -> Vec<Symbol> {
        (0..n).map(|_| self.next_symbol()).collect()
    }
}
