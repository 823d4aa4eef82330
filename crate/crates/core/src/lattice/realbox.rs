use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use super::MAX_DIM;
use crate::error::{Error, Result};
use crate::shape::GridShape;

pub type Rational = Ratio<i64>;

/// Closed l∞ ball `B̃(center, radius)` in R^d with rational data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealBox {
    dim: usize,
    center: [Rational; MAX_DIM],
    radius: Rational,
}

impl RealBox {
    pub fn new(center: &[Rational], radius: Rational) -> Result<Self> {
        if center.is_empty() || center.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(center.len()));
        }
        if radius <= Rational::zero() {
            return Err(Error::InvalidParameter(format!("box radius must be positive, got {radius}")));
        }
        let mut c = [Rational::zero(); MAX_DIM];
        c[..center.len()].copy_from_slice(center);
        Ok(Self { dim: center.len(), center: c, radius })
    }

    /// `B̃(0,1)`.
    pub fn unit(dim: usize) -> Self {
        Self::new(&vec![Rational::zero(); dim], Rational::from_integer(1)).expect("valid unit box")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[Rational] {
        &self.center[..self.dim]
    }

    pub fn radius(&self) -> Rational {
        self.radius
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim && (0..self.dim).all(|i| (x[i] - self.center[i]).abs() <= self.radius)
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        let r = self.radius.to_f64().unwrap_or(f64::NAN);
        x.len() == self.dim && (0..self.dim).all(|i| (x[i] - self.center[i].to_f64().unwrap_or(f64::NAN)).abs() <= r)
    }

    pub fn scale(&self, t: Rational) -> Result<Self> {
        let c: Vec<Rational> = self.center().iter().map(|c| *c * t).collect();
        Self::new(&c, self.radius * t)
    }

    /// Cell decomposition at resolution `m`; the box faces must lie on the grid `(1/m)Z`.
    pub fn to_grid_shape(&self, m: u32) -> Result<GridShape> {
        let mm = Rational::from_integer(m as i64);
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for i in 0..self.dim {
            let a = (self.center[i] - self.radius) * mm;
            let b = (self.center[i] + self.radius) * mm;
            if !a.is_integer() || !b.is_integer() {
                return Err(Error::InvalidParameter(format!("box is not aligned with resolution {m}")));
            }
            lo[i] = a.to_integer();
            hi[i] = b.to_integer() - 1;
        }
        GridShape::from_cell_box(self.dim, m, &lo[..self.dim], &hi[..self.dim])
    }
}
