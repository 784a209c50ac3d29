mod common;

use common::{catalog, fock_amplitudes, max_abs_diff, wavefunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symtomo::state::{sample_wigner_field, StateWigner};
use symtomo::tomography::{
    characteristic_from_field, characteristic_from_marginal, default_chi_grid, default_q_grid,
    default_unit_grid, default_x_grid, density_matrix_from_field, density_matrix_from_marginal,
    moments, radon_marginal, uncertainty_product, wigner_from_characteristic, LineQuadrature,
    MarginalField, MarginalSlice, ReconstructionConfig,
};
use symtomo::{DynamicsKind, MarginalFunction, StateSpec, TomographyParams, UniformGrid};

fn static_wigner(s: &StateSpec) -> StateWigner {
    s.wigner_at(0.0, DynamicsKind::Static)
}

#[test]
fn radon_matches_closed_form_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x_grid = UniformGrid::symmetric(6.0, 241).unwrap();
    let line = LineQuadrature::default();
    for state in catalog() {
        let w = static_wigner(&state);
        let exact = state.marginal_at(0.0, DynamicsKind::Static);
        let mut drawn = 0;
        while drawn < 25 {
            let (mu, nu) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let r2: f64 = mu * mu + nu * nu;
            if !(0.2..=9.0).contains(&r2) {
                continue;
            }
            drawn += 1;
            let p = TomographyParams::new(mu, nu, rng.random_range(-1.0..1.0));
            let a = radon_marginal(&w, p, &x_grid, &line).unwrap();
            let b = MarginalSlice::sample(&exact, p, &x_grid).unwrap();
            let err = max_abs_diff(&a.values, &b.values);
            assert!(err <= 1e-5, "{state:?} {p:?}: {err}");
        }
    }
}

#[test]
fn excited_radon_is_nonnegative_rotated_quadratures() {
    let s = StateSpec::excited_first();
    let w = static_wigner(&s);
    let x_grid = UniformGrid::symmetric(6.0, 241).unwrap();
    for k in 0..12 {
        let p = TomographyParams::rotated(0.3 * k as f64);
        let a = radon_marginal(&w, p, &x_grid, &LineQuadrature::default()).unwrap();
        let b =
            MarginalSlice::sample(&s.marginal_at(0.0, DynamicsKind::Static), p, &x_grid).unwrap();
        assert!(max_abs_diff(&a.values, &b.values) <= 1e-6);
        assert!(a.min() >= -1e-9);
    }
}

#[test]
fn radon_scaling_identity() {
    let s = StateSpec::odd_cat(1.0, 0.6).unwrap();
    let radon =
        symtomo::tomography::RadonMarginal::new(static_wigner(&s), LineQuadrature::default());
    let base = TomographyParams::new(0.7, -0.5, 0.3);
    for &lambda in &[0.5, 2.0, -1.0] {
        for &x in &[-1.5, -0.2, 0.0, 0.9, 2.0] {
            let a = radon.marginal(lambda * x, &base.scaled(lambda));
            let b = radon.marginal(x, &base) / f64::abs(lambda);
            assert!((a - b).abs() <= 1e-8, "lambda={lambda} x={x}: {a} vs {b}");
        }
    }
}

fn roundtrip(
    state: &StateSpec,
    phase: &UniformGrid,
) -> (symtomo::WignerField, symtomo::WignerField) {
    let marginal = state.marginal_at(0.0, DynamicsKind::Static);
    let chi = characteristic_from_marginal(
        &marginal,
        &default_chi_grid(),
        &default_chi_grid(),
        &default_unit_grid(),
    )
    .unwrap();
    let rebuilt = wigner_from_characteristic(&chi, phase, phase).unwrap();
    let direct = sample_wigner_field(state, phase, phase, 0.0, DynamicsKind::Static).unwrap();
    (rebuilt, direct)
}

#[test]
fn wigner_roundtrip_for_catalog() {
    let phase = UniformGrid::symmetric(4.0, 129).unwrap();
    for state in catalog() {
        let (rebuilt, direct) = roundtrip(&state, &phase);
        let err = max_abs_diff(&rebuilt.values, &direct.values);
        assert!(err <= 1e-3, "{state:?}: {err}");
    }
}

#[test]
fn excited_roundtrip_keeps_negative_origin() {
    let phase = UniformGrid::symmetric(4.0, 129).unwrap();
    let (rebuilt, _) = roundtrip(&StateSpec::excited_first(), &phase);
    assert!((rebuilt.at(64, 64) + 2.0).abs() <= 1e-2);
}

/// `wa * a + wb * b` of two marginals.
struct Mix<A, B> {
    a: A,
    b: B,
    wa: f64,
    wb: f64,
}

impl<A: MarginalFunction, B: MarginalFunction> MarginalFunction for Mix<A, B> {
    fn marginal(&self, x: f64, p: &TomographyParams) -> f64 {
        self.wa * self.a.marginal(x, p) + self.wb * self.b.marginal(x, p)
    }
}

#[test]
fn inversion_is_linear() {
    let phase = UniformGrid::symmetric(4.0, 33).unwrap();
    let a = StateSpec::coherent(0.5, 1.0).marginal_at(0.0, DynamicsKind::Static);
    let b = StateSpec::excited_first().marginal_at(0.0, DynamicsKind::Static);
    let run = |wa: f64, wb: f64| {
        let chi = characteristic_from_marginal(
            &Mix { a, b, wa, wb },
            &default_chi_grid(),
            &default_chi_grid(),
            &default_unit_grid(),
        )
        .unwrap();
        wigner_from_characteristic(&chi, &phase, &phase)
            .unwrap()
            .values
    };
    let mixed = run(0.5, 0.5);
    let wa = run(1.0, 0.0);
    let wb = run(0.0, 1.0);
    let averaged: Vec<f64> = wa.iter().zip(&wb).map(|(u, v)| 0.5 * (u + v)).collect();
    assert!(max_abs_diff(&mixed, &averaged) <= 1e-8);
}

#[test]
fn field_route_inverts_sampled_marginals() {
    // Sampled on the characteristic grid itself; slices reach |(mu, nu)| = 17,
    // so the X grid is wide.
    let chi_grid = UniformGrid::symmetric(12.0, 49).unwrap();
    let x_grid = UniformGrid::symmetric(60.0, 2401).unwrap();
    let state = StateSpec::excited_first();
    let field = MarginalField::sample(
        &state.marginal_at(0.0, DynamicsKind::Static),
        &chi_grid,
        &chi_grid,
        &x_grid,
    )
    .unwrap();
    let chi = characteristic_from_field(&field).unwrap();
    let phase = UniformGrid::symmetric(4.0, 65).unwrap();
    let rebuilt = wigner_from_characteristic(&chi, &phase, &phase).unwrap();
    let direct = sample_wigner_field(&state, &phase, &phase, 0.0, DynamicsKind::Static).unwrap();
    let err = max_abs_diff(&rebuilt.values, &direct.values);
    assert!(err <= 1e-3, "{err}");
    assert!((rebuilt.at(32, 32) + 2.0).abs() <= 1e-2);

    let q = UniformGrid::symmetric(6.0, 25).unwrap();
    let rho = density_matrix_from_field(&field, &q, &ReconstructionConfig::default()).unwrap();
    assert!((rho.trace() - 1.0).abs() <= 1e-3);
    assert!(rho.hermiticity_error() <= 1e-6);
}

/// `ρ(q, q') = psi(q) psi*(q')` from the Fock-basis wavefunction.
fn fock_density(state: &StateSpec, q: &UniformGrid) -> Vec<Complex64> {
    let c = fock_amplitudes(state, 40);
    let psi: Vec<Complex64> = q
        .points()
        .into_iter()
        .map(|x| wavefunction(&c, x, 0.0))
        .collect();
    psi.iter()
        .flat_map(|a| psi.iter().map(move |b| a * b.conj()))
        .collect()
}

#[test]
fn density_matrices_match_wavefunctions() {
    let q = default_q_grid();
    for state in catalog() {
        let w = state.marginal_at(0.0, DynamicsKind::Static);
        let rho = density_matrix_from_marginal(&w, &q, &ReconstructionConfig::default()).unwrap();
        let oracle = fock_density(&state, &q);
        let err = rho
            .values
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "{state:?}: {err}");
        assert!((rho.trace() - 1.0).abs() <= 1e-3);
        assert!(rho.hermiticity_error() <= 1e-6);
        assert!(rho.min_eigenvalue() >= -1e-3);
        assert!(
            (rho.purity() - 1.0).abs() <= 5e-3,
            "{state:?}: {}",
            rho.purity()
        );
        let rho2 =
            density_matrix_from_marginal(&w, &q, &ReconstructionConfig::with_s(2.0)).unwrap();
        let s_diff = rho
            .values
            .iter()
            .zip(&rho2.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(s_diff <= 1e-3, "{state:?}: {s_diff}");
    }
}

#[test]
fn density_matrix_point_values() {
    let q = default_q_grid();
    let ground = density_matrix_from_marginal(
        &StateSpec::ground().marginal_at(0.0, DynamicsKind::Static),
        &q,
        &ReconstructionConfig::default(),
    )
    .unwrap();
    let centre = q.index_of(0.0, 1e-9).unwrap();
    assert!((ground.at(centre, centre).re - 1.0 / std::f64::consts::PI.sqrt()).abs() <= 1e-3);

    let excited = density_matrix_from_marginal(
        &StateSpec::excited_first().marginal_at(0.0, DynamicsKind::Static),
        &q,
        &ReconstructionConfig::default(),
    )
    .unwrap();
    for (i, x) in q.points().into_iter().enumerate() {
        let want = 2.0 / std::f64::consts::PI.sqrt() * x * x * (-x * x).exp();
        assert!((excited.at(i, i).re - want).abs() <= 1e-3, "q = {x}");
    }
    let one = q.index_of(1.0, 1e-9).unwrap();
    assert!((excited.at(one, one).re - 0.415_107_5).abs() <= 1e-3);
}

#[test]
fn moments_and_uncertainty() {
    let g = default_x_grid();
    let x_axis = TomographyParams::new(1.0, 0.0, 0.0);
    let ground = MarginalSlice::sample(
        &StateSpec::ground().marginal_at(0.0, DynamicsKind::Static),
        x_axis,
        &g,
    )
    .unwrap();
    assert!((moments(&ground).unwrap().variance - 0.5).abs() <= 1e-6);
    for state in catalog() {
        let u = uncertainty_product(&state.marginal_at(0.0, DynamicsKind::Static), &g).unwrap();
        assert!(u >= 0.25 - 1e-6, "{state:?}: {u}");
    }
    let u = uncertainty_product(
        &StateSpec::excited_first().marginal_at(0.0, DynamicsKind::Static),
        &g,
    )
    .unwrap();
    assert!((u - 2.25).abs() <= 1e-5);
}
