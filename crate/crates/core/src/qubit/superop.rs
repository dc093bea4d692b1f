use super::{ComplexMatrix2, DensityMatrix};

/// `F_L(ρ) = LρL† − ½(L†Lρ + ρL†L)`.
pub fn superop_f(l: &ComplexMatrix2, rho: &DensityMatrix) -> ComplexMatrix2 {
    f_raw(l, rho.matrix())
}

/// `G_L(ρ) = Lρ + ρL† − tr(Lρ + ρL†)ρ`.
pub fn superop_g(l: &ComplexMatrix2, rho: &DensityMatrix) -> ComplexMatrix2 {
    g_raw(l, rho.matrix())
}

pub(crate) fn f_raw(l: &ComplexMatrix2, rho: &ComplexMatrix2) -> ComplexMatrix2 {
    let ld = l.adjoint();
    let ldl = ld * *l;
    *l * *rho * ld - (ldl * *rho + *rho * ldl) * 0.5
}

pub(crate) fn g_raw(l: &ComplexMatrix2, rho: &ComplexMatrix2) -> ComplexMatrix2 {
    let a = *l * *rho + *rho * l.adjoint();
    a - rho.scale(a.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::BlochVector;
    use num_complex::Complex64;

    fn zero(m: &ComplexMatrix2) -> bool {
        m.approx_eq(&ComplexMatrix2::zero(), 1e-15)
    }

    #[test]
    fn dephasing_fixes_mixed_state() {
        assert!(zero(&superop_f(&ComplexMatrix2::sigma_z(), &DensityMatrix::maximally_mixed())));
    }

    #[test]
    fn decay_of_excited_state() {
        let f = superop_f(&ComplexMatrix2::sigma_minus(), &DensityMatrix::excited());
        let expect = ComplexMatrix2::from_parts([[-1.0, 0.0], [0.0, 1.0]], [[0.0; 2]; 2]);
        assert!(f.approx_eq(&expect, 1e-15));
        assert!(zero(&superop_f(&ComplexMatrix2::sigma_minus(), &DensityMatrix::ground())));
    }

    #[test]
    fn fluorescence_noise_at_excited_state_is_sigma_x() {
        // σ_-ρ + ρσ_+ = |g⟩⟨e| + |e⟩⟨g| with zero trace.
        let g = superop_g(&ComplexMatrix2::sigma_minus(), &DensityMatrix::excited());
        assert!(g.approx_eq(&ComplexMatrix2::sigma_x(), 1e-15));
    }

    #[test]
    fn noise_vanishes_where_expected() {
        assert!(zero(&superop_g(&ComplexMatrix2::sigma_z(), &DensityMatrix::excited())));
        assert!(zero(&superop_g(&ComplexMatrix2::sigma_minus(), &DensityMatrix::ground())));
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.2, -0.4, 0.3).unwrap()).unwrap();
        assert!(zero(&superop_g(&ComplexMatrix2::identity(), &rho)));
        let shifted = ComplexMatrix2::sigma_x() + ComplexMatrix2::identity().scale(Complex64::new(0.7, -1.3));
        assert!(superop_g(&shifted, &rho).approx_eq(&superop_g(&ComplexMatrix2::sigma_x(), &rho), 1e-15));
    }
}
