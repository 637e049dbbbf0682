use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::manifold::{Jet, Manifold, SmoothFunction};
use crate::error::{Error, Result};

/// Closed-form catalog functions with hand-derived derivatives.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "function", rename_all = "snake_case")]
pub enum CatalogFunction {
    /// `cos θ` on the circle.
    CircleCos,
    /// `a cos θ + b cos φ` on the torus.
    TorusTilted { a: f64, b: f64 },
    /// `cos φ` on the torus.
    TorusCosPhi,
    /// `z` on the sphere.
    SphereHeight,
    /// `z²` on the sphere.
    SphereZsq,
    /// `z + A exp(−|x − c|² / (2σ²))` on the sphere with `c = (1, 0, 0)`.
    SphereDented { amplitude: f64, sigma: f64 },
    /// A constant function; its critical set is the whole manifold.
    Constant { manifold: Manifold, value: f64 },
}

const DENT_CENTER: [f64; 3] = [1.0, 0.0, 0.0];

impl CatalogFunction {
    fn manifold_of(&self) -> Manifold {
        match self {
            CatalogFunction::CircleCos => Manifold::Circle,
            CatalogFunction::TorusTilted { .. } | CatalogFunction::TorusCosPhi => Manifold::Torus,
            CatalogFunction::SphereHeight | CatalogFunction::SphereZsq | CatalogFunction::SphereDented { .. } => {
                Manifold::Sphere
            }
            CatalogFunction::Constant { manifold, .. } => *manifold,
        }
    }
}

impl SmoothFunction for CatalogFunction {
    fn manifold(&self) -> Manifold {
        self.manifold_of()
    }

    fn value(&self, x: &Vector3<f64>) -> f64 {
        match self {
            CatalogFunction::CircleCos => x.x.cos(),
            CatalogFunction::TorusTilted { a, b } => a * x.x.cos() + b * x.y.cos(),
            CatalogFunction::TorusCosPhi => x.y.cos(),
            CatalogFunction::SphereHeight => x.z,
            CatalogFunction::SphereZsq => x.z * x.z,
            CatalogFunction::SphereDented { amplitude, sigma } => {
                let d = x - Vector3::from(DENT_CENTER);
                x.z + amplitude * (-d.norm_squared() / (2.0 * sigma * sigma)).exp()
            }
            CatalogFunction::Constant { value, .. } => *value,
        }
    }

    fn coord_grad(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            CatalogFunction::CircleCos => Vector3::new(-x.x.sin(), 0.0, 0.0),
            CatalogFunction::TorusTilted { a, b } => Vector3::new(-a * x.x.sin(), -b * x.y.sin(), 0.0),
            CatalogFunction::TorusCosPhi => Vector3::new(0.0, -x.y.sin(), 0.0),
            CatalogFunction::SphereHeight => Vector3::z(),
            CatalogFunction::SphereZsq => Vector3::new(0.0, 0.0, 2.0 * x.z),
            CatalogFunction::SphereDented { amplitude, sigma } => {
                let d = x - Vector3::from(DENT_CENTER);
                let s2 = sigma * sigma;
                let g = amplitude * (-d.norm_squared() / (2.0 * s2)).exp();
                Vector3::z() - d * (g / s2)
            }
            CatalogFunction::Constant { .. } => Vector3::zeros(),
        }
    }

    fn jet(&self, x: &Vector3<f64>) -> Jet {
        let value = self.value(x);
        let grad = self.coord_grad(x);
        let hess = match self {
            CatalogFunction::CircleCos => {
                let mut h = Matrix3::zeros();
                h[(0, 0)] = -x.x.cos();
                h
            }
            CatalogFunction::TorusTilted { a, b } => {
                let mut h = Matrix3::zeros();
                h[(0, 0)] = -a * x.x.cos();
                h[(1, 1)] = -b * x.y.cos();
                h
            }
            CatalogFunction::TorusCosPhi => {
                let mut h = Matrix3::zeros();
                h[(1, 1)] = -x.y.cos();
                h
            }
            CatalogFunction::SphereHeight => Matrix3::zeros(),
            CatalogFunction::SphereZsq => {
                let mut h = Matrix3::zeros();
                h[(2, 2)] = 2.0;
                h
            }
            CatalogFunction::SphereDented { amplitude, sigma } => {
                let d = x - Vector3::from(DENT_CENTER);
                let s2 = sigma * sigma;
                let g = amplitude * (-d.norm_squared() / (2.0 * s2)).exp();
                (d * d.transpose() / (s2 * s2) - Matrix3::identity() / s2) * g
            }
            CatalogFunction::Constant { .. } => Matrix3::zeros(),
        };
        Jet { value, grad, hess }
    }
}

/// What kind of critical set a catalog entry has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeKind {
    Morse,
    MorseBott,
    Constant,
}

/// A named manifold-with-function from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Landscape {
    pub name: String,
    pub manifold: Manifold,
    pub kind: LandscapeKind,
    pub description: String,
    #[serde(flatten)]
    pub function: CatalogFunction,
    /// Largest perturbation size validated for this entry (Morse–Bott only).
    pub epsilon_max: Option<f64>,
}

impl SmoothFunction for Landscape {
    fn manifold(&self) -> Manifold {
        self.manifold
    }
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.function.value(x)
    }
    fn coord_grad(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.function.coord_grad(x)
    }
    fn jet(&self, x: &Vector3<f64>) -> Jet {
        self.function.jet(x)
    }
}

/// Largest perturbation size, per Morse–Bott entry: the largest value of a
/// halving sweep from 0.02 whose perturbed critical table is stable. On the
/// torus the bump derivative outweighs `sin r` in the tube annulus at 0.02.
pub const SPHERE_ZSQ_EPSILON_MAX: f64 = 0.02;
pub const TORUS_COSPHI_EPSILON_MAX: f64 = 0.01;

/// Dented-sphere bump height and width.
pub const DENT_AMPLITUDE: f64 = 1.0;
pub const DENT_SIGMA: f64 = 0.3;

struct Entry {
    name: &'static str,
    kind: LandscapeKind,
    description: &'static str,
    params: &'static [(&'static str, f64)],
    epsilon_max: Option<f64>,
}

const ENTRIES: &[Entry] = &[
    Entry {
        name: "circle_cos",
        kind: LandscapeKind::Morse,
        description: "cos θ on the circle",
        params: &[],
        epsilon_max: None,
    },
    Entry {
        name: "torus_tilted",
        kind: LandscapeKind::Morse,
        description: "a cos θ + b cos φ on the flat torus (tilted height)",
        params: &[("a", 1.0), ("b", 2.0)],
        epsilon_max: None,
    },
    Entry {
        name: "torus_cosphi",
        kind: LandscapeKind::MorseBott,
        description: "cos φ on the flat torus; critical circles φ = π and φ = 0",
        params: &[],
        epsilon_max: Some(TORUS_COSPHI_EPSILON_MAX),
    },
    Entry {
        name: "sphere_height",
        kind: LandscapeKind::Morse,
        description: "height z on the round sphere",
        params: &[],
        epsilon_max: None,
    },
    Entry {
        name: "sphere_zsq",
        kind: LandscapeKind::MorseBott,
        description: "z² on the round sphere; critical equator and poles",
        params: &[],
        epsilon_max: Some(SPHERE_ZSQ_EPSILON_MAX),
    },
    Entry {
        name: "sphere_dented",
        kind: LandscapeKind::Morse,
        description: "z plus a Gaussian bump at (1,0,0): one minimum, one saddle, two maxima",
        params: &[("amplitude", DENT_AMPLITUDE), ("sigma", DENT_SIGMA)],
        epsilon_max: None,
    },
    Entry {
        name: "circle_constant",
        kind: LandscapeKind::Constant,
        description: "constant function on the circle",
        params: &[("value", 0.0)],
        epsilon_max: None,
    },
    Entry {
        name: "torus_constant",
        kind: LandscapeKind::Constant,
        description: "constant function on the flat torus",
        params: &[("value", 0.0)],
        epsilon_max: None,
    },
    Entry {
        name: "sphere_constant",
        kind: LandscapeKind::Constant,
        description: "constant function on the round sphere",
        params: &[("value", 0.0)],
        epsilon_max: None,
    },
];

/// Names of all catalog entries.
pub fn catalog_names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

/// Every catalog landscape with default parameters.
pub fn catalog() -> Vec<Landscape> {
    ENTRIES
        .iter()
        .map(|e| lookup(e.name).expect("catalog entry builds"))
        .collect()
}

/// Catalog entry by name with default parameters.
pub fn lookup(name: &str) -> Result<Landscape> {
    lookup_with(name, &BTreeMap::new())
}

/// Catalog entry by name with parameter overrides. Unknown parameter names
/// and non-finite values are rejected.
pub fn lookup_with(name: &str, overrides: &BTreeMap<String, f64>) -> Result<Landscape> {
    let entry = ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| Error::NotFound {
        kind: "landscape",
        name: name.to_string(),
    })?;
    let mut params: BTreeMap<&str, f64> = entry.params.iter().copied().collect();
    for (k, &v) in overrides {
        let slot = params
            .get_mut(k.as_str())
            .ok_or_else(|| Error::Config(format!("landscape `{name}` has no parameter `{k}`")))?;
        if !v.is_finite() {
            return Err(Error::Config(format!("parameter `{k}` must be finite")));
        }
        *slot = v;
    }
    let p = |k: &str| params[k];
    let function = match name {
        "circle_cos" => CatalogFunction::CircleCos,
        "torus_tilted" => {
            if p("a") == 0.0 || p("b") == 0.0 {
                return Err(Error::Config("torus_tilted needs nonzero a and b".into()));
            }
            CatalogFunction::TorusTilted { a: p("a"), b: p("b") }
        }
        "torus_cosphi" => CatalogFunction::TorusCosPhi,
        "sphere_height" => CatalogFunction::SphereHeight,
        "sphere_zsq" => CatalogFunction::SphereZsq,
        "sphere_dented" => {
            if p("sigma") <= 0.0 {
                return Err(Error::Config("sphere_dented needs sigma > 0".into()));
            }
            CatalogFunction::SphereDented {
                amplitude: p("amplitude"),
                sigma: p("sigma"),
            }
        }
        "circle_constant" => CatalogFunction::Constant {
            manifold: Manifold::Circle,
            value: p("value"),
        },
        "torus_constant" => CatalogFunction::Constant {
            manifold: Manifold::Torus,
            value: p("value"),
        },
        "sphere_constant" => CatalogFunction::Constant {
            manifold: Manifold::Sphere,
            value: p("value"),
        },
        _ => unreachable!("entry table and constructor agree"),
    };
    let manifold = function.manifold_of();
    Ok(Landscape {
        name: name.to_string(),
        manifold,
        kind: entry.kind,
        description: entry.description.to_string(),
        function,
        epsilon_max: entry.epsilon_max,
    })
}

/// The constant-function entry on the same manifold.
pub fn constant_on(manifold: Manifold) -> Landscape {
    let name = match manifold {
        Manifold::Circle => "circle_constant",
        Manifold::Torus => "torus_constant",
        Manifold::Sphere => "sphere_constant",
    };
    lookup(name).expect("constant entries exist")
}
