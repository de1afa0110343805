//! Growth kinematics for the multiplicative split `F_s = F_e F_g` with an
//! isotropic growth tensor `F_g = g I`, and the Saint Venant–Kirchhoff
//! stresses that follow from it. Two-dimensional only.

use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::math;

/// A 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2 {
    pub entries: [[f64; 2]; 2],
}

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2 { entries: [[0.0; 2]; 2] };
    pub const IDENTITY: Tensor2 = Tensor2 { entries: [[1.0, 0.0], [0.0, 1.0]] };

    pub const fn new(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Tensor2 { entries: [[a00, a01], [a10, a11]] }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Tensor2::new(a, 0.0, 0.0, b)
    }

    pub fn scaled_identity(s: f64) -> Self {
        Tensor2::diag(s, s)
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.entries;
        a * d - b * c
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Tensor2::new(a, c, b, d)
    }

    pub fn scale(&self, s: f64) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Tensor2::new(s * a, s * b, s * c, s * d)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }

    /// `Fᵀ F`, with the off-diagonal computed once so the result is exactly symmetric.
    pub fn gram(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        let off = a * b + c * d;
        Tensor2::new(a * a + c * c, off, off, b * b + d * d)
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: Tensor2) -> Tensor2 {
        let mut out = self;
        for (row, r) in out.entries.iter_mut().zip(rhs.entries.iter()) {
            for (v, w) in row.iter_mut().zip(r.iter()) {
                *v += w;
            }
        }
        out
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: Tensor2) -> Tensor2 {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Tensor2 {
    type Output = Tensor2;
    fn mul(self, rhs: Tensor2) -> Tensor2 {
        let a = self.entries;
        let b = rhs.entries;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Tensor2 { entries: out }
    }
}

/// Lamé parameters of the wall, dyne/cm².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameParams {
    pub mu_s: f64,
    pub lambda_s: f64,
}

impl LameParams {
    pub fn new(mu_s: f64, lambda_s: f64) -> Result<Self> {
        if !(mu_s > 0.0 && mu_s.is_finite()) {
            return Err(Error::Domain { what: "mu_s", value: mu_s });
        }
        if !(lambda_s >= 0.0 && lambda_s.is_finite()) {
            return Err(Error::Domain { what: "lambda_s", value: lambda_s });
        }
        Ok(LameParams { mu_s, lambda_s })
    }
}

/// Isotropic growth factor `g >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GrowthFactor(f64);

impl GrowthFactor {
    pub fn new(g: f64) -> Result<Self> {
        if g >= 1.0 && g.is_finite() {
            Ok(GrowthFactor(g))
        } else {
            Err(Error::Domain { what: "growth factor", value: g })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `F_g = g I`.
    pub fn tensor(self) -> Tensor2 {
        Tensor2::scaled_identity(self.0)
    }
}

/// Prescribed growth shape of the scalar model: `1 + c_s exp(-x²) (2 - |y|)`.
pub fn growth_factor_ode(c_s: f64, x: f64, y: f64) -> Result<GrowthFactor> {
    if !(c_s >= 0.0) {
        return Err(Error::Domain { what: "c_s", value: c_s });
    }
    if !(y.abs() <= 2.0) {
        return Err(Error::Domain { what: "y", value: y });
    }
    GrowthFactor::new(1.0 + c_s * math::exp(-x * x) * (2.0 - y.abs()))
}

/// Growth factor of the reaction-diffusion model: `1 + c`.
pub fn growth_factor_pde(c: f64) -> Result<GrowthFactor> {
    if !(c >= 0.0) {
        return Err(Error::Domain { what: "c_s", value: c });
    }
    GrowthFactor::new(1.0 + c)
}

/// Elastic part `F_e = F_s / g`.
pub fn elastic_deformation(f_s: &Tensor2, g: GrowthFactor) -> Result<Tensor2> {
    check_deformation(f_s)?;
    Ok(f_s.scale(1.0 / g.value()))
}

/// Elastic Green–Lagrange strain `½(g⁻² F_sᵀF_s − I)`.
pub fn elastic_strain(f_s: &Tensor2, g: GrowthFactor) -> Result<Tensor2> {
    check_deformation(f_s)?;
    let inv_g2 = 1.0 / (g.value() * g.value());
    Ok((f_s.gram().scale(inv_g2) - Tensor2::IDENTITY).scale(0.5))
}

/// `F_e Σ_e = 2μ g⁻¹ F_s E_e + λ g⁻¹ tr(E_e) F_s`.
pub fn piola_kirchhoff_stress(f_s: &Tensor2, g: GrowthFactor, lame: LameParams) -> Result<Tensor2> {
    let e = elastic_strain(f_s, g)?;
    let inv_g = 1.0 / g.value();
    let shear = (*f_s * e).scale(2.0 * lame.mu_s * inv_g);
    let volumetric = f_s.scale(lame.lambda_s * inv_g * e.trace());
    Ok(shear + volumetric)
}

fn check_deformation(f_s: &Tensor2) -> Result<()> {
    if !f_s.is_finite() {
        return Err(Error::Domain { what: "deformation gradient", value: f64::NAN });
    }
    let det = f_s.det();
    if det <= 0.0 {
        return Err(Error::SingularDeformation { det });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(v: f64) -> GrowthFactor {
        GrowthFactor::new(v).unwrap()
    }

    fn close(a: &Tensor2, b: &Tensor2, tol: f64) -> bool {
        a.entries.iter().flatten().zip(b.entries.iter().flatten()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn growth_factor_examples() {
        assert_eq!(growth_factor_ode(0.0, 0.0, 1.0).unwrap().value(), 1.0);
        assert_eq!(growth_factor_ode(0.5, 0.0, 1.0).unwrap().value(), 1.5);
        assert_eq!(growth_factor_ode(0.5, 0.0, 2.0).unwrap().value(), 1.0);
        assert!(matches!(growth_factor_ode(-0.1, 0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(growth_factor_ode(0.1, 0.0, 2.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn strain_examples() {
        let e = elastic_strain(&Tensor2::IDENTITY, g(1.0)).unwrap();
        assert_eq!(e, Tensor2::ZERO);
        let e = elastic_strain(&Tensor2::IDENTITY, g(2.0)).unwrap();
        assert!(close(&e, &Tensor2::scaled_identity(-0.375), 1e-15));
        let e = elastic_strain(&Tensor2::diag(1.1, 1.0), g(1.0)).unwrap();
        assert!(close(&e, &Tensor2::diag(0.105, 0.0), 1e-15));
    }

    #[test]
    fn stress_examples() {
        let lame = LameParams::new(1.0e4, 4.0e4).unwrap();
        assert_eq!(piola_kirchhoff_stress(&Tensor2::IDENTITY, g(1.0), lame).unwrap(), Tensor2::ZERO);

        // Hand evaluation with E_e = -0.375 I, tr = -0.75, g⁻¹ = 0.5:
        // 2·1e4·0.5·(-0.375) + 4e4·0.5·(-0.75) = -3750 - 15000.
        let s = piola_kirchhoff_stress(&Tensor2::IDENTITY, g(2.0), lame).unwrap();
        assert!(close(&s, &Tensor2::scaled_identity(-18_750.0), 1e-9));

        let unit = LameParams::new(1.0, 0.0).unwrap();
        let s = piola_kirchhoff_stress(&Tensor2::diag(1.1, 1.0), g(1.0), unit).unwrap();
        assert!(close(&s, &Tensor2::diag(0.231, 0.0), 1e-14));
    }

    #[test]
    fn singular_deformation_rejected() {
        let f = Tensor2::new(1.0, 2.0, 0.5, 1.0);
        assert!(matches!(elastic_strain(&f, g(1.0)), Err(Error::SingularDeformation { .. })));
        assert!(matches!(
            piola_kirchhoff_stress(&Tensor2::diag(-1.0, 1.0), g(1.0), LameParams::new(1.0, 1.0).unwrap()),
            Err(Error::SingularDeformation { .. })
        ));
    }

    #[test]
    fn invalid_parameters() {
        assert!(GrowthFactor::new(0.99).is_err());
        assert!(LameParams::new(0.0, 1.0).is_err());
        assert!(LameParams::new(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn strain_is_exactly_symmetric(a in 0.5f64..2.0, b in -0.5f64..0.5, c in -0.5f64..0.5, d in 0.5f64..2.0, gv in 1.0f64..3.0) {
            let f = Tensor2::new(a, b, c, d);
            prop_assume!(f.det() > 0.0);
            let e = elastic_strain(&f, g(gv)).unwrap();
            prop_assert_eq!(e.entries[0][1], e.entries[1][0]);
        }

        #[test]
        fn growth_fully_absorbed(gv in 1.0f64..5.0) {
            let e = elastic_strain(&Tensor2::scaled_identity(gv), g(gv)).unwrap();
            prop_assert!(close(&e, &Tensor2::ZERO, 1e-14));
        }

        #[test]
        fn reference_state_is_stress_free(mu in 1.0f64..1e5, lambda in 0.0f64..1e5) {
            let s = piola_kirchhoff_stress(&Tensor2::IDENTITY, g(1.0), LameParams::new(mu, lambda).unwrap()).unwrap();
            prop_assert_eq!(s, Tensor2::ZERO);
        }

        #[test]
        fn stress_equals_fe_times_second_piola(a in 0.8f64..1.3, b in -0.2f64..0.2, d in 0.8f64..1.3, gv in 1.0f64..2.0) {
            // Route 2: F_e Σ_e with Σ_e = 2μE + λ tr(E) I, F_e = F_s/g.
            let f = Tensor2::new(a, b, 0.0, d);
            let lame = LameParams::new(3.0, 2.0).unwrap();
            let fe = elastic_deformation(&f, g(gv)).unwrap();
            let e = (fe.gram() - Tensor2::IDENTITY).scale(0.5);
            let sigma = e.scale(2.0 * lame.mu_s) + Tensor2::scaled_identity(lame.lambda_s * e.trace());
            let expected = fe * sigma;
            let got = piola_kirchhoff_stress(&f, g(gv), lame).unwrap();
            prop_assert!(close(&got, &expected, 1e-12));
        }
    }
}
