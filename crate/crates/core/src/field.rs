//! Scalar fields on the half-ball.

use std::fmt;
use std::sync::Arc;

use crate::conformal::ConfElement;
use crate::geometry::{cart_to_sph_unchecked, Point4};
use crate::series::{Tail, ZonalSeries};

pub type ClosedFn = dyn Fn([f64; 4]) -> f64 + Send + Sync;

/// How operator values for a field are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// Exact coefficient calculus.
    Series,
    /// A field pulled back by a conformal map; finite differences.
    Composite,
    /// A user-supplied closure; finite differences.
    Closed,
}

#[derive(Clone)]
pub enum Field {
    Series(Arc<ZonalSeries>),
    Closed {
        name: Arc<str>,
        extends: bool,
        zonal: bool,
        f: Arc<ClosedFn>,
    },
    /// `base ∘ element`, plus `log Ω_element` when `log_factor` is set.
    Composite {
        base: Arc<Field>,
        element: ConfElement,
        log_factor: bool,
    },
    Sum(Arc<Vec<(f64, Field)>>),
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Series(s) => write!(f, "Series({} monomials)", s.monomials().len()),
            Field::Closed { name, .. } => write!(f, "Closed({name})"),
            Field::Composite { base, log_factor, .. } => {
                write!(f, "Composite({base:?}, log_factor={log_factor})")
            }
            Field::Sum(parts) => f.debug_list().entries(parts.iter()).finish(),
        }
    }
}

impl Field {
    pub fn series(s: ZonalSeries) -> Field {
        Field::Series(Arc::new(s))
    }

    pub fn zero() -> Field {
        Field::series(ZonalSeries::zero())
    }

    pub fn constant(c: f64) -> Field {
        Field::series(ZonalSeries::constant(c))
    }

    /// A closed-form field. `extends` states whether `f` may be sampled a
    /// little outside the half-ball.
    pub fn closed<F>(name: impl Into<String>, extends: bool, f: F) -> Field
    where
        F: Fn([f64; 4]) -> f64 + Send + Sync + 'static,
    {
        Field::Closed { name: Arc::from(name.into()), extends, zonal: false, f: Arc::new(f) }
    }

    /// A closed-form field known to depend on `ρ` and `φ` only.
    pub fn closed_zonal<F>(name: impl Into<String>, extends: bool, f: F) -> Field
    where
        F: Fn([f64; 4]) -> f64 + Send + Sync + 'static,
    {
        Field::Closed { name: Arc::from(name.into()), extends, zonal: true, f: Arc::new(f) }
    }

    /// `base ∘ element` without a conformal factor term.
    pub fn pullback(base: Field, element: ConfElement) -> Field {
        Field::Composite { base: Arc::new(base), element, log_factor: false }
    }

    /// `base ∘ element + log Ω_element`. Nested actions collapse into a
    /// single element through the cocycle rule.
    pub fn acted(base: Field, element: ConfElement) -> Field {
        match base {
            Field::Composite { base: inner, element: e0, log_factor: true } => Field::Composite {
                base: inner,
                element: e0.compose(&element),
                log_factor: true,
            },
            other => Field::Composite { base: Arc::new(other), element, log_factor: true },
        }
    }

    pub fn sum(parts: Vec<(f64, Field)>) -> Field {
        Field::Sum(Arc::new(parts))
    }

    pub fn kind(&self) -> FieldKind {
        match self {
            Field::Series(_) => FieldKind::Series,
            Field::Closed { .. } => FieldKind::Closed,
            Field::Composite { .. } => FieldKind::Composite,
            Field::Sum(parts) => {
                let kinds: Vec<FieldKind> = parts.iter().map(|(_, f)| f.kind()).collect();
                if kinds.contains(&FieldKind::Composite) {
                    FieldKind::Composite
                } else if kinds.contains(&FieldKind::Closed) {
                    FieldKind::Closed
                } else {
                    FieldKind::Series
                }
            }
        }
    }

    /// Whether the field is invariant under rotations fixing the `w` axis.
    pub fn is_zonal(&self) -> bool {
        match self {
            Field::Series(_) => true,
            Field::Closed { zonal, .. } => *zonal,
            // Λ and rotations of (x, y, z) preserve ρ and w; a Lorentz
            // matrix is such a rotation when it fixes the time axis.
            Field::Composite { base, element, .. } => {
                base.is_zonal() && (element.lorentz()[(0, 0)] - 1.0).abs() < 1e-14
            }
            Field::Sum(parts) => parts.iter().all(|(_, f)| f.is_zonal()),
        }
    }

    /// Whether evaluation slightly outside the half-ball is meaningful.
    pub fn extends_beyond_domain(&self) -> bool {
        match self {
            Field::Series(s) => s.tail() == Tail::Finite,
            Field::Closed { extends, .. } => *extends,
            Field::Composite { base, .. } => base.extends_beyond_domain(),
            Field::Sum(parts) => parts.iter().all(|(_, f)| f.extends_beyond_domain()),
        }
    }

    pub fn value(&self, p: &Point4) -> f64 {
        match self {
            Field::Series(s) => s.value(p.rho(), p.phi()),
            _ => self.value_cart(p.cartesian()),
        }
    }

    pub fn value_cart(&self, c: [f64; 4]) -> f64 {
        match self {
            Field::Series(s) => {
                let sph = cart_to_sph_unchecked(c);
                s.value(sph.rho, sph.phi)
            }
            Field::Closed { f, .. } => f(c),
            Field::Composite { base, element, log_factor } => {
                let (q, om) = element.apply_with_factor(c);
                let v = base.value_cart(q);
                if *log_factor {
                    v + om.ln()
                } else {
                    v
                }
            }
            Field::Sum(parts) => parts.iter().map(|(w, f)| w * f.value_cart(c)).sum(),
        }
    }

    /// Series parts of a field, if it is a plain series or a sum of them.
    pub fn as_series(&self) -> Option<ZonalSeries> {
        match self {
            Field::Series(s) => Some((**s).clone()),
            Field::Sum(parts) => {
                let mut acc = ZonalSeries::zero();
                for (w, f) in parts.iter() {
                    acc = acc.add(&f.as_series()?.scale(*w));
                }
                Some(acc)
            }
            _ => None,
        }
    }
}
