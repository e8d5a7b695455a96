//! Plane-strain isotropic elasticity in Voigt form.
//!
//! Strains are `(ε11, ε22, 2 ε12)` and stresses `(σ11, σ22, σ12)`, so that
//! `σ : ε = σ_V · ε_V`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Constant,
    Smooth,
}

type LameFn = Arc<dyn Fn(Point) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
enum Lame {
    Constant { lambda: f64, mu: f64 },
    Variable(LameFn),
}

/// Position-dependent isotropic stiffness `C(x)` given by Lamé moduli.
#[derive(Clone)]
pub struct ElasticityField {
    lame: Lame,
    scale: f64,
    regularity: Regularity,
}

impl fmt::Debug for ElasticityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lame {
            Lame::Constant { lambda, mu } => write!(f, "ElasticityField(λ={lambda}, μ={mu}, scale={})", self.scale),
            Lame::Variable(_) => write!(f, "ElasticityField(variable, scale={})", self.scale),
        }
    }
}

/// `σ = 2 μ ε + λ tr(ε) I` with constant moduli.
pub fn plane_strain_isotropic(lambda: f64, mu: f64) -> Result<ElasticityField> {
    if !(mu > 0.0) || !(lambda >= 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return Err(Error::Material(format!("λ = {lambda}, μ = {mu}")));
    }
    Ok(ElasticityField {
        lame: Lame::Constant { lambda, mu },
        scale: 1.0,
        regularity: Regularity::Constant,
    })
}

/// `λ(x) = μ(x) = 1 - |x - (1/2, 1/2)|^2`, between 1/2 and 1 on the unit square.
pub fn variable_field_test_c() -> ElasticityField {
    ElasticityField::variable(|x| {
        let d2 = (x.x - 0.5).powi(2) + (x.y - 0.5).powi(2);
        let m = 1.0 - d2;
        (m, m)
    })
}

impl ElasticityField {
    /// Smooth field from a closure returning `(λ, μ)`.
    pub fn variable(lame: impl Fn(Point) -> (f64, f64) + Send + Sync + 'static) -> Self {
        ElasticityField {
            lame: Lame::Variable(Arc::new(lame)),
            scale: 1.0,
            regularity: Regularity::Smooth,
        }
    }

    /// The same field with `C` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ElasticityField {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn lame(&self, x: Point) -> (f64, f64) {
        let (l, m) = match &self.lame {
            Lame::Constant { lambda, mu } => (*lambda, *mu),
            Lame::Variable(f) => f(x),
        };
        (self.scale * l, self.scale * m)
    }

    /// Voigt stiffness `C_V(x)`.
    pub fn stiffness(&self, x: Point) -> Matrix3<f64> {
        let (l, m) = self.lame(x);
        let a = 2.0 * m + l;
        Matrix3::new(a, l, 0.0, l, a, 0.0, 0.0, 0.0, m)
    }

    /// Voigt compliance `D_V(x) = C_V(x)^{-1}`.
    pub fn compliance(&self, x: Point) -> Matrix3<f64> {
        let (l, m) = self.lame(x);
        let a = 2.0 * m + l;
        let det = a * a - l * l;
        Matrix3::new(a / det, -l / det, 0.0, -l / det, a / det, 0.0, 0.0, 0.0, 1.0 / m)
    }

    /// Stress from a Voigt strain.
    pub fn stress(&self, x: Point, strain: &Vector3<f64>) -> Vector3<f64> {
        self.stiffness(x) * strain
    }

    /// Half the trace of the Voigt compliance.
    pub fn kappa(&self, x: Point) -> f64 {
        0.5 * self.compliance(x).trace()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.regularity, Regularity::Constant)
    }
}

pub fn kappa(field: &ElasticityField, x: Point) -> f64 {
    field.kappa(x)
}
