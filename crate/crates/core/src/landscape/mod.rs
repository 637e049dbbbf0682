//! Catalog manifolds with one global chart each (circle, flat torus, round
//! sphere), smooth functions on them with closed-form gradients and
//! Hessians, and tubular coordinates around critical circles.

mod catalog;
mod chart;
mod manifold;

pub use catalog::{
    catalog, catalog_names, constant_on, lookup, lookup_with, CatalogFunction, Landscape, LandscapeKind,
    DENT_AMPLITUDE, DENT_SIGMA, SPHERE_ZSQ_EPSILON_MAX, TORUS_COSPHI_EPSILON_MAX,
};
pub use chart::{BumpProfile, CircleChart, PointChart};
pub use manifold::{wrap_angle, wrap_signed, Jet, Manifold, Point, SmoothFunction, CONSTRAINT_TOL};

use nalgebra::DMatrix;

use crate::error::Result;

/// Function value at a validated point.
pub fn eval_f(f: &dyn SmoothFunction, x: &Point) -> Result<f64> {
    let p = f.manifold().validate(x.coords())?;
    Ok(f.value(&p))
}

/// Riemannian gradient at a validated point, in stored coordinates.
pub fn eval_grad(f: &dyn SmoothFunction, x: &Point) -> Result<Vec<f64>> {
    let m = f.manifold();
    let p = m.validate(x.coords())?;
    let g = f.gradient(&p);
    Ok(g.as_slice()[..m.coord_dim()].to_vec())
}

/// Riemannian Hessian at a validated point, in the orthonormal tangent
/// basis of [`Manifold::tangent_basis`] (the coordinate basis on tori).
pub fn eval_hessian(f: &dyn SmoothFunction, x: &Point) -> Result<DMatrix<f64>> {
    let p = f.manifold().validate(x.coords())?;
    Ok(f.tangent_hessian(&p).1)
}
