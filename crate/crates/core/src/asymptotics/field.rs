//! Covariances of the pinned Brownian sheet `B_C` and of the limit field
//! `G_C(u) = B_C(u) − Σ_j ∂_j C(u) B_C(1, …, u_j, …, 1)` of the empirical
//! copula process.

use crate::copula::{CopulaFamily, CopulaModel};
use crate::error::{Error, Result};

/// Scratch buffer sized for small dimensions without heap traffic.
pub(crate) struct Buf {
    stack: [f64; 8],
    heap: Vec<f64>,
    d: usize,
}

impl Buf {
    pub(crate) fn new(d: usize) -> Self {
        Self {
            stack: [0.0; 8],
            heap: if d > 8 { vec![0.0; d] } else { Vec::new() },
            d,
        }
    }

    pub(crate) fn get(&mut self) -> &mut [f64] {
        if self.d <= 8 {
            &mut self.stack[..self.d]
        } else {
            &mut self.heap[..]
        }
    }
}

fn check_pair(model: &CopulaModel, u: &[f64], v: &[f64]) -> Result<()> {
    for p in [u, v] {
        if p.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: p.len(),
            });
        }
        if let Some(&value) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::OutsideUnitCube { value });
        }
    }
    Ok(())
}

/// `E[B_C(u) B_C(v)] = C(u ∧ v) − C(u) C(v)`.
pub fn brownian_sheet_cov(model: &CopulaModel, u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(model, u, v)?;
    Ok(sheet_cov(model.family(), u, v))
}

/// `E[G_C(u) G_C(v)]`.
pub fn gc_cov(model: &CopulaModel, u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(model, u, v)?;
    Ok(field_cov(model.family(), u, v))
}

pub(crate) fn sheet_cov(c: &dyn CopulaFamily, u: &[f64], v: &[f64]) -> f64 {
    let mut buf = Buf::new(u.len());
    let w = buf.get();
    for ((wi, a), b) in w.iter_mut().zip(u).zip(v) {
        *wi = a.min(*b);
    }
    c.cdf(w) - c.cdf(u) * c.cdf(v)
}

/// Bilinear expansion of `E[G_C(u) G_C(v)]` into `1 + 2d + d²` sheet
/// covariances, with the marginal sheets `B_C(1, …, x_j, …, 1)` evaluated
/// as points of the same sheet.
pub(crate) fn field_cov(c: &dyn CopulaFamily, u: &[f64], v: &[f64]) -> f64 {
    let d = u.len();
    let mut eu_buf = Buf::new(d);
    let mut ev_buf = Buf::new(d);
    let mut du_buf = Buf::new(d);
    let mut dv_buf = Buf::new(d);
    let du = du_buf.get();
    let dv = dv_buf.get();
    for j in 0..d {
        du[j] = c.partial(u, j);
        dv[j] = c.partial(v, j);
    }

    let mut total = sheet_cov(c, u, v);
    let eu = eu_buf.get();
    let ev = ev_buf.get();
    for j in 0..d {
        ev.fill(1.0);
        ev[j] = v[j];
        total -= dv[j] * sheet_cov(c, u, ev);
        eu.fill(1.0);
        eu[j] = u[j];
        total -= du[j] * sheet_cov(c, eu, v);
    }
    for i in 0..d {
        eu.fill(1.0);
        eu[i] = u[i];
        for j in 0..d {
            ev.fill(1.0);
            ev[j] = v[j];
            total += du[i] * dv[j] * sheet_cov(c, eu, ev);
        }
    }
    total
}
