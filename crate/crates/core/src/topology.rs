//! Arithmetic admissibility of plane fields (hence neutral metrics) on
//! compact 4-manifolds from χ, τ and the intersection form.
//!
//! Second cohomology is assumed torsion-free throughout.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourManifoldTopology {
    pub name: String,
    pub euler: i64,
    pub signature: i64,
    /// Intersection form on H²/Tor in some integral basis.
    pub form: Vec<Vec<i64>>,
    pub oriented: bool,
}

fn hyperbolic() -> Vec<Vec<i64>> {
    vec![vec![0, 1], vec![1, 0]]
}

/// Negative-definite E8 (Cartan matrix of E8, negated).
fn minus_e8() -> Vec<Vec<i64>> {
    // Dynkin chain 0-1-2-3-4-5-6 with node 7 attached to node 4
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
    let mut m = vec![vec![0; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = -2;
    }
    for (a, b) in edges {
        m[a][b] = 1;
        m[b][a] = 1;
    }
    m
}

/// Block-diagonal sum of square integer matrices.
pub fn direct_sum(blocks: &[Vec<Vec<i64>>]) -> Vec<Vec<i64>> {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut m = vec![vec![0; n]; n];
    let mut off = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[off + i][off + j] = *v;
            }
        }
        off += b.len();
    }
    m
}

/// Exact determinant by fraction-free elimination.
pub fn integer_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

impl FourManifoldTopology {
    pub fn new(name: &str, euler: i64, signature: i64, form: Vec<Vec<i64>>) -> Result<Self> {
        let t = Self {
            name: name.into(),
            euler,
            signature,
            form,
            oriented: true,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn rank(&self) -> usize {
        self.form.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.rank();
        for (i, row) in self.form.iter().enumerate() {
            if row.len() != n {
                return Err(GeomError::Invalid(format!(
                    "row {i} has length {}",
                    row.len()
                )));
            }
            for j in 0..i {
                if row[j] != self.form[j][i] {
                    return Err(GeomError::Invalid("intersection form not symmetric".into()));
                }
            }
        }
        let det = integer_det(&self.form);
        if det.abs() != 1 {
            return Err(GeomError::NotUnimodular(det));
        }
        let (p, q) = self.inertia();
        if p as i64 - q as i64 != self.signature {
            return Err(GeomError::Invalid(format!(
                "signature {} disagrees with the form ({p} positive, {q} negative)",
                self.signature
            )));
        }
        Ok(())
    }

    /// Numbers of positive and negative eigenvalues.
    pub fn inertia(&self) -> (usize, usize) {
        let n = self.rank();
        if n == 0 {
            return (0, 0);
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.form[i][j] as f64);
        let ev = m.symmetric_eigenvalues();
        (
            ev.iter().filter(|&&v| v > 0.5e-6).count(),
            ev.iter().filter(|&&v| v < -0.5e-6).count(),
        )
    }

    fn extreme_eigenvalues(&self) -> (f64, f64) {
        let n = self.rank();
        if n == 0 {
            return (0.0, 0.0);
        }
        let ev = DMatrix::from_fn(n, n, |i, j| self.form[i][j] as f64).symmetric_eigenvalues();
        (ev.min(), ev.max())
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.form[i][i] % 2 == 0)
    }

    pub fn mu(&self, w: &[i64]) -> i64 {
        let nz: Vec<usize> = (0..w.len()).filter(|&i| w[i] != 0).collect();
        let mut s = 0;
        for &i in &nz {
            for &j in &nz {
                s += w[i] * self.form[i][j] * w[j];
            }
        }
        s
    }
}

/// Bundled manifolds with their standard (χ, τ, form).
pub fn catalogue() -> Vec<FourManifoldTopology> {
    let mk = |n: &str, e, s, f| FourManifoldTopology::new(n, e, s, f).expect("catalogue entry");
    let h = hyperbolic();
    vec![
        mk("S4", 2, 0, vec![]),
        mk("S2xS2", 4, 0, h.clone()),
        mk("CP2", 3, 1, vec![vec![1]]),
        mk(
            "K3",
            24,
            -16,
            direct_sum(&[minus_e8(), minus_e8(), h.clone(), h.clone(), h.clone()]),
        ),
        mk("T4", 0, 0, direct_sum(&[h.clone(), h.clone(), h])),
    ]
}

pub fn manifold(name: &str) -> Result<FourManifoldTopology> {
    let key = name.to_ascii_lowercase().replace('×', "x");
    catalogue()
        .into_iter()
        .find(|m| m.name.to_ascii_lowercase() == key)
        .ok_or_else(|| GeomError::Unknown(name.into()))
}

/// χ ≡ 0 mod 2 and χ ≡ τ mod 4.
pub fn atiyah_check(euler: i64, signature: i64) -> bool {
    euler.rem_euclid(2) == 0 && (euler - signature).rem_euclid(4) == 0
}

/// Human-readable reason for an Atiyah failure, if any.
pub fn atiyah_failure(euler: i64, signature: i64) -> Option<&'static str> {
    if euler.rem_euclid(2) != 0 {
        Some("fails Atiyah parity (Euler characteristic odd)")
    } else if (euler - signature).rem_euclid(4) != 0 {
        Some("fails Atiyah congruence (χ ≢ τ mod 4)")
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Admissibility {
    Admits,
    Rejects,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSearch {
    pub target: i64,
    pub witness: Option<Vec<i64>>,
    /// Why the target cannot be represented at all.
    pub certificate: Option<String>,
    /// Whether every vector with ‖w‖∞ ≤ radius was tried.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfReport {
    pub manifold: String,
    pub verdict: Admissibility,
    pub radius: i64,
    pub plus: TargetSearch,
    pub minus: TargetSearch,
}

/// Vectors tried before the search gives up on larger supports.
pub const SEARCH_BUDGET: u64 = 20_000_000;

/// Obstructions that hold at every radius.
fn static_certificate(t: &FourManifoldTopology, target: i64) -> Option<String> {
    if target == 0 {
        return None;
    }
    if t.rank() == 0 {
        return Some("zero form represents only 0".into());
    }
    if t.is_even() && target.rem_euclid(2) == 1 {
        return Some("even form represents only even integers".into());
    }
    let (lo, hi) = t.extreme_eigenvalues();
    if lo > 0.0 && target < 0 {
        return Some("positive-definite form represents no negative integer".into());
    }
    if hi < 0.0 && target > 0 {
        return Some("negative-definite form represents no positive integer".into());
    }
    None
}

/// For a definite form |μ(w,w)| ≥ λ|w|², so an exhaustive box search that
/// covers |w|² ≤ |target|/λ settles the question.
fn bound_certificate(t: &FourManifoldTopology, target: i64, radius: i64) -> Option<String> {
    let (lo, hi) = t.extreme_eigenvalues();
    let lam = if lo > 0.0 {
        lo
    } else if hi < 0.0 {
        -hi
    } else {
        return None;
    };
    let bound = (target.abs() as f64 / lam).sqrt();
    (bound < radius as f64 + 0.5).then(|| {
        format!("definite form: exhaustive search to radius {radius} covers |w| ≤ {bound:.2}")
    })
}

/// Calls `visit` on every vector with ‖w‖∞ ≤ r, in order of increasing
/// support, until it returns true or the budget runs out. Returns whether
/// the box was exhausted.
fn enumerate(n: usize, r: i64, budget: u64, visit: &mut dyn FnMut(&[i64]) -> bool) -> bool {
    let mut w = vec![0i64; n];
    if visit(&w) {
        return false;
    }
    let mut spent = 1u64;
    let per = (2 * r) as u64;
    for k in 1..=n {
        // cost of this support size: C(n,k)·(2r)^k
        let mut cost = 1u64;
        for i in 0..k {
            cost = cost.saturating_mul((n - i) as u64).saturating_mul(per) / (i as u64 + 1);
        }
        if spent.saturating_add(cost) > budget {
            return false;
        }
        spent += cost;
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            // all nonzero assignments on idx
            let mut vals = vec![-r; k];
            loop {
                for (p, &i) in idx.iter().enumerate() {
                    w[i] = vals[p];
                }
                if vals.iter().all(|&v| v != 0) && visit(&w) {
                    return false;
                }
                let mut p = 0;
                loop {
                    if p == k {
                        break;
                    }
                    vals[p] += 1;
                    if vals[p] == 0 {
                        vals[p] = 1;
                    }
                    if vals[p] <= r {
                        break;
                    }
                    vals[p] = -r;
                    p += 1;
                }
                if p == k {
                    break;
                }
            }
            for &i in &idx {
                w[i] = 0;
            }
            // next k-subset
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    true
}

/// Searches for w with μ(w,w) = `target` and ‖w‖∞ ≤ `radius`.
pub fn represent(t: &FourManifoldTopology, target: i64, radius: i64) -> TargetSearch {
    if let Some(c) = static_certificate(t, target) {
        return TargetSearch {
            target,
            witness: None,
            certificate: Some(c),
            exhaustive: false,
        };
    }
    let mut witness = None;
    let exhaustive = enumerate(t.rank(), radius, SEARCH_BUDGET, &mut |w| {
        if t.mu(w) == target {
            witness = Some(w.to_vec());
        }
        witness.is_some()
    });
    let certificate = match (&witness, exhaustive) {
        (None, true) => bound_certificate(t, target, radius),
        _ => None,
    };
    TargetSearch {
        target,
        witness,
        certificate,
        exhaustive,
    }
}

/// Searches for w with μ(w,w) = 3τ ± 2χ and ‖w‖∞ ≤ `radius`.
pub fn hirzebruch_hopf_check(t: &FourManifoldTopology, radius: i64) -> Result<HopfReport> {
    if radius < 1 {
        return Err(GeomError::Invalid(
            "search radius must be at least 1".into(),
        ));
    }
    t.validate()?;
    let plus = represent(t, 3 * t.signature + 2 * t.euler, radius);
    let minus = represent(t, 3 * t.signature - 2 * t.euler, radius);
    let verdict = if plus.witness.is_some() && minus.witness.is_some() {
        Admissibility::Admits
    } else if plus.certificate.is_some() || minus.certificate.is_some() {
        Admissibility::Rejects
    } else {
        Admissibility::Inconclusive
    };
    Ok(HopfReport {
        manifold: t.name.clone(),
        verdict,
        radius,
        plus,
        minus,
    })
}
