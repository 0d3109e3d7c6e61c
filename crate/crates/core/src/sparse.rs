//! Sparse collections, the sparse bilinear form `Λ_{r,s}`, a stopping-time
//! constructor and domination ratios.
//!
//! A collection is sparse when every cube `Q` carries a set `E_Q ⊂ Q` with
//! `|E_Q| ≥ |Q|/2` and the `E_Q` are pairwise disjoint. Both conditions are
//! checked by [`verify_sparsity`], never assumed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::grid::{check_exponent, DyadicCube, PowerSums, Signal};
use crate::hilbert::LinearOperator;

/// Sparsity constant: `|E_Q| ≥ SPARSITY·|Q|`.
pub const SPARSITY: f64 = 0.5;

/// Default stopping threshold of [`build_sparse_collection`].
pub const DEFAULT_C0: f64 = 16.0;

/// One cube and its major set, stored as sorted disjoint half-open ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub shift: u8,
    pub level: u32,
    pub index: i64,
    pub major: Vec<(i64, i64)>,
}

impl SparseEntry {
    pub fn new(cube: DyadicCube, major: Vec<(i64, i64)>) -> Self {
        Self {
            shift: cube.shift,
            level: cube.level,
            index: cube.index,
            major,
        }
    }

    pub fn cube(&self) -> Result<DyadicCube> {
        DyadicCube::new(self.shift, self.level, self.index)
    }

    pub fn major_size(&self) -> i64 {
        self.major.iter().map(|(a, b)| (b - a).max(0)).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseCollection {
    pub entries: Vec<SparseEntry>,
    /// Stopping threshold the collection was built with, if constructed.
    pub c0: Option<f64>,
}

impl SparseCollection {
    pub fn new(entries: Vec<SparseEntry>) -> Self {
        Self { entries, c0: None }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cubes(&self) -> Result<Vec<DyadicCube>> {
        self.entries.iter().map(SparseEntry::cube).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| LabError::Parse(e.to_string()))
    }
}

/// Outcome of [`verify_sparsity`].
#[derive(Debug, Clone, Serialize)]
pub struct SparsityReport {
    pub sparse: bool,
    pub violations: Vec<String>,
    /// `min_Q |E_Q|/|Q|`, 1 for the empty collection.
    pub min_density: f64,
}

pub fn verify_sparsity(s: &SparseCollection) -> SparsityReport {
    let mut violations = Vec::new();
    let mut min_density = 1.0f64;
    let mut all_ranges: Vec<(i64, i64, usize)> = Vec::new();
    for (i, e) in s.entries.iter().enumerate() {
        let cube = match e.cube() {
            Ok(c) => c,
            Err(err) => {
                violations.push(format!("entry {i}: {err}"));
                continue;
            }
        };
        let (lo, hi) = cube.bounds();
        for &(a, b) in &e.major {
            if a >= b {
                violations.push(format!("entry {i} ({cube}): empty range [{a}, {b})"));
            } else if a < lo || b > hi {
                violations.push(format!("entry {i} ({cube}): range [{a}, {b}) leaves Q"));
            }
            all_ranges.push((a, b, i));
        }
        let density = e.major_size() as f64 / cube.side() as f64;
        min_density = min_density.min(density);
        if density < SPARSITY {
            violations.push(format!("entry {i} ({cube}): |E_Q|/|Q| = {density} < {SPARSITY}"));
        }
    }
    all_ranges.sort();
    for pair in all_ranges.windows(2) {
        let (a0, b0, i0) = pair[0];
        let (a1, b1, i1) = pair[1];
        if a1 < b0 {
            violations.push(format!(
                "major sets of entries {i0} and {i1} overlap: [{a0}, {b0}) and [{a1}, {b1})"
            ));
        }
    }
    SparsityReport {
        sparse: violations.is_empty(),
        violations,
        min_density,
    }
}

/// `Λ_{r,s}(f,g) = Σ_{Q∈S} ⟨f⟩_{Q,r}⟨g⟩_{Q,s}|Q|`, averages over `3Q`.
pub fn sparse_form(s: &SparseCollection, f: &Signal, g: &Signal, r: f64, t: f64) -> Result<f64> {
    check_exponent(r)?;
    check_exponent(t)?;
    let report = verify_sparsity(s);
    if !report.sparse {
        return Err(LabError::NotSparse(report.violations.join("; ")));
    }
    let pf = PowerSums::new(f, r);
    let pg = PowerSums::new(g, t);
    let mut total = 0.0;
    for q in s.cubes()? {
        let (a, b) = q.triple();
        let len = (b - a) as f64;
        total += (pf.sum(a, b) / len).powf(1.0 / r) * (pg.sum(a, b) / len).powf(1.0 / t) * q.side() as f64;
    }
    Ok(total)
}

/// Smallest cube of the three grids containing `[lo, hi)`; ties go to the
/// smallest shift.
pub fn root_cube(lo: i64, hi: i64) -> Result<DyadicCube> {
    if hi <= lo {
        return Err(invalid("root cube of an empty range"));
    }
    for level in 0..=crate::grid::MAX_LEVEL {
        for shift in 1..=3u8 {
            let q = DyadicCube::containing(shift, level, lo);
            if q.end() >= hi {
                return Ok(q);
            }
        }
    }
    Err(invalid(format!("range [{lo}, {hi}) is too long for the grid")))
}

/// r-th powers of 3Q-averages, read off prefix sums.
struct Averages {
    f: PowerSums,
    g: PowerSums,
}

impl Averages {
    fn at(&self, q: &DyadicCube) -> (f64, f64) {
        let (a, b) = q.triple();
        let len = (b - a) as f64;
        (self.f.sum(a, b) / len, self.g.sum(a, b) / len)
    }
}

/// Maximal subcubes of `q` (same grid) whose 3Q′-averages jump above
/// `threshold` times those of `q`, in left-to-right order.
fn stopping_children(q: &DyadicCube, avg: &Averages, c0_r: f64) -> Vec<DyadicCube> {
    let (fq, gq) = avg.at(q);
    let mut out = Vec::new();
    let mut stack: Vec<DyadicCube> = q.children().map(|c| vec![c[1], c[0]]).unwrap_or_default();
    while let Some(c) = stack.pop() {
        let (fc, gc) = avg.at(&c);
        if fc > c0_r * fq || gc > c0_r * gq {
            out.push(c);
        } else if fc > 0.0 || gc > 0.0 {
            // a triple without mass has no descendant with mass either
            if let Some([left, right]) = c.children() {
                stack.push(right);
                stack.push(left);
            }
        }
    }
    out
}

fn construct(root: DyadicCube, avg: &Averages, c0_r: f64) -> Option<Vec<SparseEntry>> {
    let mut entries = Vec::new();
    let mut queue = vec![root];
    while let Some(q) = queue.pop() {
        let children = stopping_children(&q, avg, c0_r);
        let (lo, hi) = q.bounds();
        let mut major = Vec::with_capacity(children.len() + 1);
        let mut cursor = lo;
        for c in &children {
            if c.start() > cursor {
                major.push((cursor, c.start()));
            }
            cursor = c.end();
        }
        if hi > cursor {
            major.push((cursor, hi));
        }
        let entry = SparseEntry::new(q, major);
        if (entry.major_size() as f64) < SPARSITY * q.side() as f64 {
            return None;
        }
        entries.push(entry);
        queue.extend(children.into_iter().rev());
    }
    Some(entries)
}

/// Stopping-time sparse collection for `(f, g)`.
///
/// From the root cube, the stopping children of `Q` are the maximal
/// subcubes `Q′` of the same grid with `⟨f⟩_{Q′,r} > C0⟨f⟩_{Q,r}` or
/// `⟨g⟩_{Q′,r} > C0⟨g⟩_{Q,r}`; `E_Q` is `Q` minus their union. If some
/// `E_Q` is too small, the construction restarts with `C0` doubled; the
/// final value is stored on the collection.
pub fn build_sparse_collection(f: &Signal, g: &Signal, r: f64, c0: f64) -> Result<SparseCollection> {
    check_exponent(r)?;
    if !(c0 > 1.0 && c0.is_finite()) {
        return Err(invalid(format!("stopping threshold C0 = {c0} must exceed 1")));
    }
    let support = match (f.support(), g.support()) {
        (None, None) => {
            return Ok(SparseCollection {
                entries: Vec::new(),
                c0: Some(c0),
            })
        }
        (Some(a), None) | (None, Some(a)) => a,
        (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
    };
    let root = root_cube(support.0, support.1)?;
    let avg = Averages {
        f: PowerSums::new(f, r),
        g: PowerSums::new(g, r),
    };
    let mut c0 = c0;
    loop {
        if let Some(entries) = construct(root, &avg, c0.powf(r)) {
            return Ok(SparseCollection {
                entries,
                c0: Some(c0),
            });
        }
        c0 *= 2.0;
        if !c0.is_finite() {
            return Err(LabError::NotSparse("no threshold gives density 1/2".into()));
        }
    }
}

/// `|⟨Tf, g⟩|` against `Λ_r(f, g)` for the constructed collection.
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub numerator: f64,
    pub form: f64,
    pub ratio: f64,
    pub cubes: usize,
    pub c0: f64,
}

pub fn domination_ratio(op: &dyn LinearOperator, f: &Signal, g: &Signal, r: f64) -> Result<DominationReport> {
    let numerator = crate::grid::bilinear_pairing(&op.apply(f), g).abs();
    let s = build_sparse_collection(f, g, r, DEFAULT_C0)?;
    let form = sparse_form(&s, f, g, r, r)?;
    let ratio = if numerator == 0.0 {
        0.0
    } else if form == 0.0 {
        return Err(LabError::DegenerateForm { numerator });
    } else {
        numerator / form
    };
    Ok(DominationReport {
        numerator,
        form,
        ratio,
        cubes: s.len(),
        c0: s.c0.unwrap_or(DEFAULT_C0),
    })
}
