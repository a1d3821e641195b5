//! Words over HB, CB, HO, CO that reduce to the empty word, and rooted planar
//! maps decorated by a spanning tree.
//!
//! A map is stored as darts with an edge involution `alpha` and a vertex
//! rotation `sigma`. The word is the contour tour of the tree: at a tree dart
//! the tour crosses the edge and continues at `sigma(alpha(h))`, at any other
//! dart it stays at the vertex and continues at `sigma(h)`. HB/HO mark the
//! first and second passage along a tree edge, CB/CO the two passages by a
//! non-tree edge.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::reduce::{match_map, reduce, Reducer};
use crate::symbol::{Symbol, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("word contains unidentified special symbol at position {0}")]
    Special(usize),
    #[error("word does not reduce to the empty word")]
    NotReducible,
    #[error("empty word has no rooted map")]
    Empty,
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error("invalid decoration: {0}")]
    Decoration(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialMap {
    pub alpha: Vec<usize>,
    pub sigma: Vec<usize>,
    pub root: usize,
}

fn orbits(perm: &[usize]) -> (Vec<usize>, usize) {
    let mut id = vec![usize::MAX; perm.len()];
    let mut count = 0;
    for start in 0..perm.len() {
        if id[start] != usize::MAX {
            continue;
        }
        let mut d = start;
        while id[d] == usize::MAX {
            id[d] = count;
            d = perm[d];
        }
        count += 1;
    }
    (id, count)
}

impl CombinatorialMap {
    pub fn darts(&self) -> usize {
        self.alpha.len()
    }

    pub fn edge_count(&self) -> usize {
        self.alpha.len() / 2
    }

    /// Face permutation sigma∘alpha.
    pub fn phi(&self) -> Vec<usize> {
        self.alpha.iter().map(|&a| self.sigma[a]).collect()
    }

    /// Vertex id of every dart and the vertex count.
    pub fn vertices(&self) -> (Vec<usize>, usize) {
        orbits(&self.sigma)
    }

    /// Face id of every dart and the face count.
    pub fn faces(&self) -> (Vec<usize>, usize) {
        orbits(&self.phi())
    }

    /// Edge id of every dart, numbered by the smaller dart.
    pub fn edge_ids(&self) -> Vec<usize> {
        let mut id = vec![usize::MAX; self.darts()];
        let mut next = 0;
        for d in 0..self.darts() {
            if id[d] == usize::MAX {
                id[d] = next;
                id[self.alpha[d]] = next;
                next += 1;
            }
        }
        id
    }

    /// Endpoints of each edge as vertex ids; loops allowed.
    pub fn graph_edges(&self) -> (Vec<(usize, usize)>, usize) {
        let (vid, nv) = self.vertices();
        let mut edges = Vec::new();
        for d in 0..self.darts() {
            let a = self.alpha[d];
            if d < a {
                edges.push((vid[d], vid[a]));
            }
        }
        (edges, nv)
    }

    pub fn with_root(&self, root: usize) -> Self {
        CombinatorialMap { root, ..self.clone() }
    }

    /// BFS relabelling from the root; equal forms mean rooted isomorphism.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let n = self.darts();
        let mut label = vec![usize::MAX; n];
        if n == 0 {
            return label;
        }
        let mut q = VecDeque::new();
        label[self.root] = 0;
        q.push_back(self.root);
        let mut next = 1;
        while let Some(d) = q.pop_front() {
            for nb in [self.sigma[d], self.alpha[d]] {
                if label[nb] == usize::MAX {
                    label[nb] = next;
                    next += 1;
                    q.push_back(nb);
                }
            }
        }
        label
    }

    pub fn canonical_form(&self) -> String {
        let label = self.canonical_labels();
        let mut inv = vec![0; self.darts()];
        for (d, &l) in label.iter().enumerate() {
            if l != usize::MAX {
                inv[l] = d;
            }
        }
        let mut s = String::new();
        for &d in &inv {
            let _ = write!(s, "{},{};", label[self.alpha[d]], label[self.sigma[d]]);
        }
        s
    }
}

/// Report of structural checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EulerReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    pub violations: Vec<String>,
}

impl EulerReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

pub fn euler_validate(m: &CombinatorialMap) -> EulerReport {
    let mut r = EulerReport::default();
    let n = m.darts();
    if m.sigma.len() != n {
        r.violations.push(format!("sigma has {} entries for {} darts", m.sigma.len(), n));
        return r;
    }
    if n == 0 {
        r.violations.push("map has no darts".into());
        return r;
    }
    if n % 2 == 1 {
        r.violations.push("odd number of darts".into());
    }
    if !is_permutation(&m.alpha) {
        r.violations.push("alpha is not a permutation".into());
        return r;
    }
    if (0..n).any(|d| m.alpha[d] == d || m.alpha[m.alpha[d]] != d) {
        r.violations.push("alpha is not a fixed-point-free involution".into());
    }
    if !is_permutation(&m.sigma) {
        r.violations.push("sigma is not a permutation".into());
        return r;
    }
    if m.root >= n {
        r.violations.push("root dart out of range".into());
    }
    let reached = m.canonical_labels().iter().filter(|&&l| l != usize::MAX).count();
    if m.root < n && reached != n {
        r.violations.push("map is not connected".into());
    }
    r.vertices = m.vertices().1;
    r.faces = m.faces().1;
    r.edges = n / 2;
    r.euler = r.vertices as i64 - r.edges as i64 + r.faces as i64;
    if r.euler != 2 {
        r.violations.push(format!("V - E + F = {} (not planar)", r.euler));
    }
    r
}

/// A map with a spanning tree, flagged per dart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedMap {
    pub map: CombinatorialMap,
    pub tree: Vec<bool>,
}

/// One face of the quadrangulation: an edge with its two endpoints and the
/// two faces it separates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quad {
    pub edge: usize,
    /// primal vertex ids
    pub primal: [usize; 2],
    /// dual vertex (face) ids
    pub dual: [usize; 2],
    pub tree: bool,
}

impl DecoratedMap {
    /// Darts in tour order, starting at the root.
    pub fn tour(&self) -> Result<Vec<usize>, MapError> {
        let m = &self.map;
        let n = m.darts();
        let mut out = Vec::with_capacity(n);
        let mut h = m.root;
        for _ in 0..n {
            out.push(h);
            h = if self.tree[h] { m.sigma[m.alpha[h]] } else { m.sigma[h] };
        }
        if h != m.root {
            return Err(MapError::Decoration("tour does not close".into()));
        }
        let mut seen = vec![false; n];
        for &d in &out {
            if seen[d] {
                return Err(MapError::Decoration("tour revisits a dart".into()));
            }
            seen[d] = true;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), MapError> {
        let rep = euler_validate(&self.map);
        if !rep.ok() {
            return Err(MapError::Invalid(rep.violations.join("; ")));
        }
        if self.tree.len() != self.map.darts() {
            return Err(MapError::Decoration("tree flags length".into()));
        }
        if (0..self.map.darts()).any(|d| self.tree[d] != self.tree[self.map.alpha[d]]) {
            return Err(MapError::Decoration("tree flag differs between darts of an edge".into()));
        }
        let (edges, nv) = self.map.graph_edges();
        let ids = self.map.edge_ids();
        let mut in_tree = vec![false; edges.len()];
        for d in 0..self.map.darts() {
            if self.tree[d] {
                in_tree[ids[d]] = true;
            }
        }
        let chosen: Vec<(usize, usize)> =
            edges.iter().zip(&in_tree).filter(|(_, &t)| t).map(|(&e, _)| e).collect();
        if chosen.len() + 1 != nv || !spans(&chosen, nv) {
            return Err(MapError::Decoration("tree edges do not form a spanning tree".into()));
        }
        Ok(())
    }

    /// Dual map: same darts, rotation sigma∘alpha, complementary tree.
    pub fn dual(&self) -> DecoratedMap {
        DecoratedMap {
            map: CombinatorialMap {
                alpha: self.map.alpha.clone(),
                sigma: self.map.phi(),
                root: self.map.root,
            },
            tree: self.tree.iter().map(|t| !t).collect(),
        }
    }

    pub fn canonical_form(&self) -> String {
        let label = self.map.canonical_labels();
        let mut flags = vec!['0'; self.map.darts()];
        for (d, &l) in label.iter().enumerate() {
            if self.tree[d] {
                flags[l] = '1';
            }
        }
        let mut s = self.map.canonical_form();
        s.push('|');
        s.extend(flags);
        s
    }

    /// Peano order: the edge crossed at each step of the tour.
    pub fn peano_sequence(&self) -> Result<Vec<usize>, MapError> {
        let ids = self.map.edge_ids();
        Ok(self.tour()?.into_iter().map(|d| ids[d]).collect())
    }

    pub fn quadrangulation(&self) -> Vec<Quad> {
        let (vid, nv) = self.map.vertices();
        let (fid, _) = self.map.faces();
        let ids = self.map.edge_ids();
        let mut quads = Vec::new();
        for d in 0..self.map.darts() {
            let a = self.map.alpha[d];
            if d < a {
                quads.push(Quad {
                    edge: ids[d],
                    primal: [vid[d], vid[a]],
                    dual: [nv + fid[d], nv + fid[a]],
                    tree: self.tree[d],
                });
            }
        }
        quads
    }

    /// Height of the tour in the tree and in the dual tree.
    pub fn contour_functions(&self) -> Result<(Vec<i64>, Vec<i64>), MapError> {
        let ids = self.map.edge_ids();
        let mut seen = vec![false; self.map.edge_count()];
        let (mut p, mut q) = (vec![0i64], vec![0i64]);
        for d in self.tour()? {
            let step = if seen[ids[d]] { -1 } else { 1 };
            seen[ids[d]] = true;
            let (dp, dq) = if self.tree[d] { (step, 0) } else { (0, step) };
            p.push(p.last().unwrap() + dp);
            q.push(q.last().unwrap() + dq);
        }
        Ok((p, q))
    }

    pub fn to_dot(&self) -> String {
        let (vid, nv) = self.map.vertices();
        let (fid, nf) = self.map.faces();
        let mut s = String::from("graph decorated {\n");
        for v in 0..nv {
            let _ = writeln!(s, "  v{v} [shape=circle];");
        }
        for f in 0..nf {
            let _ = writeln!(s, "  f{f} [shape=box];");
        }
        for d in 0..self.map.darts() {
            let a = self.map.alpha[d];
            if d > a {
                continue;
            }
            let root = d == self.map.root || a == self.map.root;
            let primal_style = if self.tree[d] { "solid, penwidth=3" } else { "solid" };
            let dual_style = if self.tree[d] { "dashed" } else { "dashed, penwidth=3" };
            let label = if root { ", label=root" } else { "" };
            let _ = writeln!(s, "  v{} -- v{} [style=\"{primal_style}\"{label}];", vid[d], vid[a]);
            let _ = writeln!(s, "  f{} -- f{} [style=\"{dual_style}\"];", fid[d], fid[a]);
        }
        s.push_str("}\n");
        s
    }

    /// Text format: dart count, alpha, sigma, root and per-dart tree flags.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let flags: Vec<usize> = self.tree.iter().map(|&t| t as usize).collect();
        format!(
            "darts {}\nalpha {}\nsigma {}\nroot {}\ntree {}\n",
            self.map.darts(),
            join(&self.map.alpha),
            join(&self.map.sigma),
            self.map.root,
            join(&flags)
        )
    }

    /// Relabel darts in canonical order.
    pub fn canonical(&self) -> DecoratedMap {
        let label = self.map.canonical_labels();
        let n = self.map.darts();
        let mut alpha = vec![0; n];
        let mut sigma = vec![0; n];
        let mut tree = vec![false; n];
        for d in 0..n {
            alpha[label[d]] = label[self.map.alpha[d]];
            sigma[label[d]] = label[self.map.sigma[d]];
            tree[label[d]] = self.tree[d];
        }
        DecoratedMap { map: CombinatorialMap { alpha, sigma, root: 0 }, tree }
    }
}

/// Parse the text format; the tree line is optional (no tree edges).
pub fn parse_map_text(text: &str) -> Result<DecoratedMap, MapError> {
    let mut darts = None;
    let mut alpha = None;
    let mut sigma = None;
    let mut root = None;
    let mut tree = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let nums: Result<Vec<usize>, _> = parts.map(str::parse::<usize>).collect();
        let nums = nums.map_err(|e| MapError::Parse { line: i + 1, msg: e.to_string() })?;
        let one = |v: &[usize]| {
            if v.len() == 1 {
                Ok(v[0])
            } else {
                Err(MapError::Parse { line: i + 1, msg: format!("{key} takes one value") })
            }
        };
        match key {
            "darts" => darts = Some(one(&nums)?),
            "alpha" => alpha = Some(nums),
            "sigma" => sigma = Some(nums),
            "root" => root = Some(one(&nums)?),
            "tree" => tree = Some(nums.iter().map(|&x| x != 0).collect::<Vec<bool>>()),
            other => return Err(MapError::Parse { line: i + 1, msg: format!("unknown key {other}") }),
        }
    }
    let missing = |k: &str| MapError::Parse { line: 0, msg: format!("missing {k}") };
    let darts = darts.ok_or_else(|| missing("darts"))?;
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    let sigma = sigma.ok_or_else(|| missing("sigma"))?;
    let root = root.ok_or_else(|| missing("root"))?;
    if alpha.len() != darts || sigma.len() != darts {
        return Err(MapError::Parse { line: 0, msg: "array length differs from dart count".into() });
    }
    let tree = tree.unwrap_or_else(|| vec![false; darts]);
    if tree.len() != darts {
        return Err(MapError::Parse { line: 0, msg: "tree flags length differs from dart count".into() });
    }
    let m = CombinatorialMap { alpha, sigma, root };
    let rep = euler_validate(&m);
    if !rep.ok() {
        return Err(MapError::Invalid(rep.violations.join("; ")));
    }
    Ok(DecoratedMap { map: m, tree })
}

fn spans(edges: &[(usize, usize)], nv: usize) -> bool {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = nv;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            comps -= 1;
        }
    }
    comps == 1
}

pub fn word_to_decorated_map(x: &[Symbol]) -> Result<DecoratedMap, MapError> {
    if let Some(i) = x.iter().position(|s| !s.is_plain()) {
        return Err(MapError::Special(i));
    }
    if !reduce(x).is_empty() {
        return Err(MapError::NotReducible);
    }
    if x.is_empty() {
        return Err(MapError::Empty);
    }
    let mm = match_map(x);
    // edge e is opened by the e-th burger
    let mut edge_of = vec![usize::MAX; x.len()];
    let mut ne = 0;
    for (i, s) in x.iter().enumerate() {
        if s.is_burger() {
            edge_of[i] = ne;
            edge_of[mm.partner(i).unwrap()] = ne;
            ne += 1;
        }
    }
    let mut rot: Vec<Vec<usize>> = vec![Vec::new()];
    let mut tree = vec![false; 2 * ne];
    let mut cur = 0usize;
    let mut parents = Vec::new();
    for (i, &s) in x.iter().enumerate() {
        let e = edge_of[i];
        match s {
            Symbol::HB => {
                rot[cur].push(2 * e);
                tree[2 * e] = true;
                tree[2 * e + 1] = true;
                parents.push(cur);
                rot.push(vec![2 * e + 1]);
                cur = rot.len() - 1;
            }
            Symbol::HO => cur = parents.pop().expect("balanced"),
            Symbol::CB => rot[cur].push(2 * e),
            Symbol::CO => rot[cur].push(2 * e + 1),
            _ => unreachable!(),
        }
    }
    let mut sigma = vec![0; 2 * ne];
    for r in &rot {
        for k in 0..r.len() {
            sigma[r[k]] = r[(k + 1) % r.len()];
        }
    }
    let alpha = (0..2 * ne).map(|d| d ^ 1).collect();
    Ok(DecoratedMap { map: CombinatorialMap { alpha, sigma, root: 0 }, tree })
}

pub fn map_to_word(m: &DecoratedMap) -> Result<Word, MapError> {
    m.validate()?;
    let ids = m.map.edge_ids();
    let mut seen = vec![false; m.map.edge_count()];
    Ok(m.tour()?
        .into_iter()
        .map(|d| {
            let first = !seen[ids[d]];
            seen[ids[d]] = true;
            match (m.tree[d], first) {
                (true, true) => Symbol::HB,
                (true, false) => Symbol::HO,
                (false, true) => Symbol::CB,
                (false, false) => Symbol::CO,
            }
        })
        .collect())
}

/// a(T) and d(T) with per-position flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivityReport {
    pub a: u32,
    pub d: u32,
    pub active: Vec<bool>,
    pub duplicate: Vec<bool>,
}

/// Active orders eat the rightmost burger of the reduced prefix; duplicate
/// burgers repeat its type.
pub fn activity_counts(x: &[Symbol]) -> Result<ActivityReport, MapError> {
    let mut m = Reducer::new();
    let mut rep = ActivityReport { a: 0, d: 0, active: vec![false; x.len()], duplicate: vec![false; x.len()] };
    for (i, &s) in x.iter().enumerate() {
        let st = m.push(s);
        if st.identified.is_none() {
            return Err(MapError::Special(i));
        }
        if st.is_active() {
            rep.active[i] = true;
            rep.a += 1;
        }
        if st.is_duplicate() {
            rep.duplicate[i] = true;
            rep.d += 1;
        }
    }
    if !m.snapshot().is_empty() {
        return Err(MapError::NotReducible);
    }
    Ok(rep)
}

/// Integer polynomial in two variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly2 {
    pub coeffs: BTreeMap<(u32, u32), i64>,
}

impl Poly2 {
    pub fn one() -> Self {
        let mut p = Poly2::default();
        p.coeffs.insert((0, 0), 1);
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: i64) {
        let e = self.coeffs.entry((i, j)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn add(&mut self, o: &Poly2) {
        for (&(i, j), &c) in &o.coeffs {
            self.add_term(i, j, c);
        }
    }

    pub fn shift(&self, di: u32, dj: u32) -> Poly2 {
        Poly2 { coeffs: self.coeffs.iter().map(|(&(i, j), &c)| ((i + di, j + dj), c)).collect() }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs.iter().map(|(&(i, j), &c)| c as f64 * x.powi(i as i32) * y.powi(j as i32)).sum()
    }

    pub fn eval_int(&self, x: i64, y: i64) -> i128 {
        self.coeffs
            .iter()
            .map(|(&(i, j), &c)| c as i128 * (x as i128).pow(i) * (y as i128).pow(j))
            .sum()
    }

    /// Substitute y := x, giving a one-variable coefficient list.
    pub fn diagonal(&self) -> Vec<i64> {
        let deg = self.coeffs.keys().map(|&(i, j)| (i + j) as usize).max().unwrap_or(0);
        let mut out = vec![0; deg + 1];
        for (&(i, j), &c) in &self.coeffs {
            out[(i + j) as usize] += c;
        }
        out
    }

    /// Substitute the second variable by 1.
    pub fn first_marginal(&self) -> Vec<i64> {
        let deg = self.coeffs.keys().map(|&(i, _)| i as usize).max().unwrap_or(0);
        let mut out = vec![0; deg + 1];
        for (&(i, _), &c) in &self.coeffs {
            out[i as usize] += c;
        }
        out
    }
}

fn for_each_spanning_tree(edges: &[(usize, usize)], nv: usize, f: &mut dyn FnMut(&[bool])) {
    fn rec(
        k: usize,
        edges: &[(usize, usize)],
        chosen: &mut Vec<bool>,
        parent: &mut Vec<usize>,
        left: usize,
        f: &mut dyn FnMut(&[bool]),
    ) {
        if left == 0 {
            f(chosen);
            return;
        }
        if edges.len() - k < left {
            return;
        }
        let find = |p: &Vec<usize>, mut x: usize| {
            while p[x] != x {
                x = p[x];
            }
            x
        };
        let (u, v) = edges[k];
        let (a, b) = (find(parent, u), find(parent, v));
        if a != b {
            parent[a] = b;
            chosen[k] = true;
            rec(k + 1, edges, chosen, parent, left - 1, f);
            chosen[k] = false;
            parent[a] = a;
        }
        rec(k + 1, edges, chosen, parent, left, f);
    }
    let mut chosen = vec![false; edges.len()];
    let mut parent: Vec<usize> = (0..nv).collect();
    rec(0, edges, &mut chosen, &mut parent, nv - 1, f);
}

/// Σ_T y^{a(T)} z^{d(T)} over spanning trees, as a polynomial in (y, z).
/// Trees are enumerated directly, without memoization.
pub fn partition_polynomial(m: &CombinatorialMap) -> Result<Poly2, MapError> {
    let rep = euler_validate(m);
    if !rep.ok() {
        return Err(MapError::Invalid(rep.violations.join("; ")));
    }
    let (edges, nv) = m.graph_edges();
    let ids = m.edge_ids();
    let mut poly = Poly2::default();
    let mut err = None;
    for_each_spanning_tree(&edges, nv, &mut |chosen| {
        let tree: Vec<bool> = (0..m.darts()).map(|d| chosen[ids[d]]).collect();
        let dm = DecoratedMap { map: m.clone(), tree };
        match map_to_word(&dm).and_then(|w| activity_counts(&w)) {
            Ok(r) => poly.add_term(r.a, r.d, 1),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(poly),
    }
}

pub fn partition_function(m: &CombinatorialMap, y: f64, z: f64) -> Result<f64, MapError> {
    Ok(partition_polynomial(m)?.eval(y, z))
}

pub fn spanning_tree_count(m: &CombinatorialMap) -> u64 {
    let (edges, nv) = m.graph_edges();
    let mut n = 0;
    for_each_spanning_tree(&edges, nv, &mut |_| n += 1);
    n
}

/// Tutte polynomial by deletion and contraction on the underlying multigraph.
pub fn tutte_polynomial(edges: &[(usize, usize)]) -> Poly2 {
    fn bridge(edges: &[(usize, usize)], u: usize, v: usize) -> bool {
        let mut stack = vec![u];
        let mut seen = vec![u];
        while let Some(x) = stack.pop() {
            if x == v {
                return false;
            }
            for &(a, b) in edges {
                let nb = if a == x { b } else if b == x { a } else { continue };
                if !seen.contains(&nb) {
                    seen.push(nb);
                    stack.push(nb);
                }
            }
        }
        true
    }
    let Some((&(u, v), rest)) = edges.split_last() else {
        return Poly2::one();
    };
    if u == v {
        return tutte_polynomial(rest).shift(0, 1);
    }
    let contracted: Vec<(usize, usize)> = rest
        .iter()
        .map(|&(a, b)| (if a == v { u } else { a }, if b == v { u } else { b }))
        .collect();
    if bridge(rest, u, v) {
        return tutte_polynomial(&contracted).shift(1, 0);
    }
    let mut p = tutte_polynomial(rest);
    p.add(&tutte_polynomial(&contracted));
    p
}

pub fn map_tutte_polynomial(m: &CombinatorialMap) -> Poly2 {
    tutte_polynomial(&m.graph_edges().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{dagger, format_word, parse_word};

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    const FIG4: &str = "hchhHccHHCchhhCHCHCH";
    const FIG6: &str = "hEEDFEDSSFcEDDSFSFSF";

    #[test]
    fn one_edge_maps() {
        let link = word_to_decorated_map(&w("hH")).unwrap();
        let rep = euler_validate(&link.map);
        assert_eq!((rep.vertices, rep.edges, rep.faces, rep.euler), (2, 1, 1, 2));
        assert!(link.tree.iter().all(|&t| t));
        let lp = word_to_decorated_map(&w("cC")).unwrap();
        let rep = euler_validate(&lp.map);
        assert_eq!((rep.vertices, rep.edges, rep.faces), (1, 1, 2));
        assert_ne!(link.canonical_form(), lp.canonical_form());
        assert_eq!(link.dual().canonical_form(), lp.canonical_form());
    }

    #[test]
    fn rejects_bad_words() {
        assert_eq!(word_to_decorated_map(&w("hHc")), Err(MapError::NotReducible));
        assert_eq!(word_to_decorated_map(&w("hF")), Err(MapError::Special(1)));
        assert_eq!(word_to_decorated_map(&[]), Err(MapError::Empty));
    }

    #[test]
    fn fig4_map() {
        let x = w(FIG4);
        let m = word_to_decorated_map(&x).unwrap();
        let rep = euler_validate(&m.map);
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(map_to_word(&m).unwrap(), x);
        let q = m.quadrangulation();
        assert_eq!(q.len(), 10);
        assert_eq!(rep.vertices + rep.faces, 12);
        let lam = m.peano_sequence().unwrap();
        assert_eq!(lam.len(), 20);
        for e in 0..10 {
            assert_eq!(lam.iter().filter(|&&x| x == e).count(), 2);
        }
        let (p, d) = m.contour_functions().unwrap();
        let t = crate::walk::Trajectory::from_word(&x);
        assert_eq!(p, t.d());
        assert_eq!(d, t.d_star());
    }

    #[test]
    fn contour_of_single_edge() {
        let m = word_to_decorated_map(&w("hH")).unwrap();
        assert_eq!(m.contour_functions().unwrap(), (vec![0, 1, 0], vec![0, 0, 0]));
    }

    #[test]
    fn activity_examples() {
        let r = activity_counts(&w("hH")).unwrap();
        assert_eq!((r.a, r.d), (1, 0));
        let r6 = activity_counts(&w(FIG6)).unwrap();
        // the plain c at index 10 follows a cheeseburger on top, so it is a
        // duplicate too; the four D letters are not the whole count
        assert_eq!((r6.a, r6.d), (5, 5));
        let r4 = activity_counts(&w(FIG4)).unwrap();
        assert_eq!(r4, r6);
        let fig6 = w(FIG6);
        for (i, s) in fig6.iter().enumerate() {
            assert_eq!(r6.active[i], *s == Symbol::FO);
            assert_eq!(r6.duplicate[i], *s == Symbol::DB || i == 10);
        }
        assert!(activity_counts(&w("hHh")).is_err());
    }

    #[test]
    fn tutte_examples() {
        let bridge = tutte_polynomial(&[(0, 1)]);
        assert_eq!(bridge.eval_int(2, 5), 2);
        let lp = tutte_polynomial(&[(0, 0)]);
        assert_eq!(lp.eval_int(2, 5), 5);
        let tri = tutte_polynomial(&[(0, 1), (1, 2), (2, 0)]);
        let mut expect = Poly2::default();
        expect.add_term(2, 0, 1);
        expect.add_term(1, 0, 1);
        expect.add_term(0, 1, 1);
        assert_eq!(tri, expect);
        assert_eq!(tri.eval_int(2, 2), 8);
    }

    #[test]
    fn partition_examples() {
        let link = word_to_decorated_map(&w("hH")).unwrap();
        let z = partition_polynomial(&link.map).unwrap();
        assert_eq!(z.eval_int(7, 3), 7);
        let fig = word_to_decorated_map(&w(FIG4)).unwrap();
        let z = partition_polynomial(&fig.map).unwrap();
        assert_eq!(z.eval_int(1, 1) as u64, spanning_tree_count(&fig.map));
        let t = map_tutte_polynomial(&fig.map);
        for y in 1..=3 {
            let zy: i128 = z.first_marginal().iter().enumerate().map(|(i, &c)| c as i128 * (y as i128).pow(i as u32)).sum();
            assert_eq!(zy, t.eval_int(y, y));
        }
    }

    #[test]
    fn dual_is_dagger() {
        let x = w(FIG4);
        let m = word_to_decorated_map(&x).unwrap();
        let md = word_to_decorated_map(&dagger(&x)).unwrap();
        assert_eq!(m.dual().canonical_form(), md.canonical_form());
        assert_eq!(format_word(&map_to_word(&m.dual()).unwrap()), format_word(&dagger(&x)));
    }

    #[test]
    fn text_roundtrip() {
        let m = word_to_decorated_map(&w(FIG4)).unwrap();
        let parsed = parse_map_text(&m.to_text()).unwrap();
        assert_eq!(parsed, m);
        let c = m.canonical();
        assert_eq!(c.canonical_form(), m.canonical_form());
        assert_eq!(map_to_word(&c).unwrap(), w(FIG4));
        assert!(parse_map_text("darts 2\nalpha 0 1\nsigma 0 1\nroot 0\n").is_err());
        assert!(m.to_dot().starts_with("graph decorated {"));
    }

    #[test]
    fn invalid_maps_reported() {
        let bad = CombinatorialMap { alpha: vec![1, 0, 3, 2], sigma: vec![0, 1, 2, 3], root: 0 };
        let rep = euler_validate(&bad);
        assert!(rep.violations.iter().any(|v| v.contains("connected")));
    }
}
