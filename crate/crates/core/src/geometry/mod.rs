//! Metric fields, Levi-Civita curvature, Hodge star on 2-forms, the
//! SD/ASD Weyl split and Petrov-Penrose typing.

mod curvature;
pub(crate) mod hodge;
pub mod linalg;
mod petrov;

pub use curvature::{curvature_pack, CurvaturePack};
pub use hodge::{
    asd_residual, asd_residual_at, hodge_star2, levi_civita, sd_weyl_mixed, weyl_split, TwoForm,
};
pub use petrov::{
    classify_quartic, petrov_classify, petrov_from_vectors, weyl_spinor, PetrovType, WeylQuartic,
};

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jets::{DomainBox, Evaluator, Expr, Jet2};
use linalg::{inertia, invert};

/// Predicate marking points removed from the chart.
pub type Excluded = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// How the components are stored. Frames given by vector fields produce the
/// inverse metric directly; it is inverted at jet level on evaluation.
#[derive(Debug, Clone)]
pub enum MetricRepr {
    Covariant(Vec<Vec<Expr>>),
    Contravariant(Vec<Vec<Expr>>),
}

#[derive(Clone)]
pub struct MetricField {
    pub dim: usize,
    pub repr: MetricRepr,
    pub signature: (usize, usize),
    pub domain: DomainBox,
    pub excluded: Option<Excluded>,
    /// Sign of ε_{01..} relative to √|det g| in chart order.
    pub orientation: f64,
    pub coords: Vec<String>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("signature", &self.signature)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("coords", &self.coords)
            .finish()
    }
}

fn default_coords(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("x{i}")).collect()
}

impl MetricField {
    pub fn covariant(components: Vec<Vec<Expr>>) -> Self {
        let dim = components.len();
        Self::build(dim, MetricRepr::Covariant(components))
    }

    pub fn contravariant(components: Vec<Vec<Expr>>) -> Self {
        let dim = components.len();
        Self::build(dim, MetricRepr::Contravariant(components))
    }

    fn build(dim: usize, repr: MetricRepr) -> Self {
        assert!(dim == 3 || dim == 4, "metric dimension must be 3 or 4");
        let signature = if dim == 4 { (2, 2) } else { (2, 1) };
        Self {
            dim,
            repr,
            signature,
            domain: DomainBox::unbounded(dim),
            excluded: None,
            orientation: 1.0,
            coords: default_coords(dim),
        }
    }

    /// Constant diagonal metric.
    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self::covariant(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| Expr::constant(if i == j { d[i] } else { 0.0 }))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn flat4() -> Self {
        Self::diagonal(&[1.0, 1.0, -1.0, -1.0])
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        assert_eq!(domain.dim(), self.dim);
        self.domain = domain;
        self
    }

    pub fn with_excluded(mut self, f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.excluded = Some(Arc::new(f));
        self
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = sign.signum();
        self
    }

    pub fn with_signature(mut self, sig: (usize, usize)) -> Self {
        self.signature = sig;
        self
    }

    pub fn with_coords(mut self, names: &[&str]) -> Self {
        assert_eq!(names.len(), self.dim);
        self.coords = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn components(&self) -> &Vec<Vec<Expr>> {
        match &self.repr {
            MetricRepr::Covariant(c) | MetricRepr::Contravariant(c) => c,
        }
    }

    /// Multiply by the conformal factor e^f (f an expression in the chart).
    pub fn conformal(&self, f: &Expr) -> Self {
        let mut out = self.clone();
        let (factor, comps) = match &mut out.repr {
            MetricRepr::Covariant(c) => (f.exp(), c),
            MetricRepr::Contravariant(c) => ((-f).exp(), c),
        };
        for row in comps.iter_mut() {
            for e in row.iter_mut() {
                *e = &factor * &*e;
            }
        }
        out
    }

    /// Inside the box and not excluded.
    pub fn in_chart(&self, p: &[f64]) -> bool {
        self.domain.contains(p) && !self.excluded.as_ref().is_some_and(|f| f(p))
    }

    /// Covariant components to second-order jets.
    pub fn jets<const N: usize>(&self, p: &[f64]) -> Result<[[Jet2<N>; N]; N]> {
        if N != self.dim {
            return Err(GeomError::Arity {
                needed: self.dim,
                got: N,
            });
        }
        if !self.in_chart(p) {
            return Err(GeomError::Domain { point: p.to_vec() });
        }
        let vars: Vec<Jet2<N>> = p
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet2::variable(x, i))
            .collect();
        let mut ev = Evaluator::new(&vars);
        let comps = self.components();
        let mut m = [[Jet2::constant(0.0); N]; N];
        for a in 0..N {
            for b in a..N {
                let v = ev.eval(&comps[a][b])?;
                m[a][b] = v;
                m[b][a] = v;
            }
        }
        match self.repr {
            MetricRepr::Covariant(_) => Ok(m),
            MetricRepr::Contravariant(_) => invert(&m),
        }
    }

    /// Covariant components as plain numbers.
    pub fn values<const N: usize>(&self, p: &[f64]) -> Result<[[f64; N]; N]> {
        if N != self.dim {
            return Err(GeomError::Arity {
                needed: self.dim,
                got: N,
            });
        }
        if !self.in_chart(p) {
            return Err(GeomError::Domain { point: p.to_vec() });
        }
        let mut ev = Evaluator::new(p);
        let comps = self.components();
        let mut m = [[0.0; N]; N];
        for a in 0..N {
            for b in a..N {
                let v = ev.eval(&comps[a][b])?;
                m[a][b] = v;
                m[b][a] = v;
            }
        }
        match self.repr {
            MetricRepr::Covariant(_) => Ok(m),
            MetricRepr::Contravariant(_) => invert(&m),
        }
    }

    /// In chart, invertible, and of the target signature.
    pub fn admissible<const N: usize>(&self, p: &[f64]) -> bool {
        match self.values::<N>(p) {
            Ok(g) => inertia(&g, 1e-10) == self.signature,
            Err(_) => false,
        }
    }

    pub fn check_signature<const N: usize>(&self, p: &[f64]) -> Result<()> {
        let g = self.values::<N>(p)?;
        let s = inertia(&g, 1e-10);
        if s != self.signature {
            return Err(GeomError::Degenerate(format!(
                "signature {s:?} at {p:?}, expected {:?}",
                self.signature
            )));
        }
        Ok(())
    }
}
