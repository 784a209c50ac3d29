//! Checks shared by the test suites and the command line `check` command.
//!
//! Every check yields a [`CheckResult`] carrying the measured quantity, the
//! threshold it was held to and enough context to reproduce it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    evolve_characteristics, evolve_pde_snapshots, evolve_wigner_reference, reduce_equation,
    PotentialSpec, Scheme, SolverConfig,
};
use crate::grid::UniformGrid;
use crate::state::{
    cat_normalization, default_phase_grid, marginal_eval, sample_wigner_field, wigner_eval,
    DynamicsKind, PhasePoint, StateSpec, WignerField,
};
use crate::tomography::{
    characteristic_from_marginal, default_chi_grid, default_q_grid, default_unit_grid,
    default_x_grid, density_matrix_from_marginal, moments, radon_marginal, uncertainty_product,
    wigner_from_characteristic, CharacteristicGrid, DensityMatrixGrid, LineQuadrature,
    MarginalField, MarginalFunction, MarginalSlice, RadonMarginal, ReconstructionConfig,
    TomographyParams, WignerFunction, SLICE_POSITIVITY_FLOOR,
};

/// Thresholds used by the checks; serializable so a run can be configured
/// from a file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub normalization: f64,
    pub positivity_floor: f64,
    pub forward: f64,
    pub roundtrip: f64,
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
    pub s_invariance: f64,
    /// Grid solver against the exact characteristic solution.
    pub pde: f64,
    pub pde_positivity_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            normalization: 1e-4,
            positivity_floor: SLICE_POSITIVITY_FLOOR,
            forward: 1e-6,
            roundtrip: 1e-3,
            hermiticity: 1e-6,
            trace: 1e-3,
            min_eigenvalue: -1e-3,
            purity: 5e-3,
            s_invariance: 1e-3,
            pde: 1e-3,
            pde_positivity_floor: -1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    #[serde(default)]
    pub context: BTreeMap<String, String>,
}

impl CheckResult {
    /// Passes when `measured <= threshold` (NaN fails).
    pub fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            context: BTreeMap::new(),
        }
    }

    /// Passes when `measured >= threshold` (NaN fails).
    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            context: BTreeMap::new(),
        }
    }

    /// Passes when `|measured - target| <= tol` (NaN fails).
    pub fn within(name: &str, measured: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: (measured - target).abs() <= tol,
            measured,
            threshold: tol,
            context: BTreeMap::from([("target".to_string(), target.to_string())]),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.context.insert(key.into(), value.to_string());
        self
    }
}

/// Difference statistics over the points two sampled objects share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_abs: f64,
    /// Euclidean norm of the difference vector, `sqrt(Σ |a - b|^2)`.
    pub l2: f64,
    /// Grid coordinates of the largest difference.
    pub argmax_location: Vec<f64>,
    pub n_points: usize,
}

/// A sampled object that can be compared point by point.
pub trait Sampled {
    /// Description of the sampling grid; equal signatures mean equal grids.
    fn grid_signature(&self) -> String;
    /// Samples in a fixed order, `None` where a sample is not meaningful.
    fn samples(&self) -> Vec<Option<Complex64>>;
    /// Grid coordinates of the sample at `index`.
    fn coordinates(&self, index: usize) -> Vec<f64>;
}

fn coords2(a: &UniformGrid, b: &UniformGrid, index: usize) -> Vec<f64> {
    vec![a.point(index / b.len), b.point(index % b.len)]
}

fn real(v: &[f64]) -> Vec<Option<Complex64>> {
    v.iter().map(|&x| Some(Complex64::new(x, 0.0))).collect()
}

impl Sampled for WignerField {
    fn grid_signature(&self) -> String {
        format!("wigner {:?} {:?}", self.q_grid, self.p_grid)
    }
    fn samples(&self) -> Vec<Option<Complex64>> {
        real(&self.values)
    }
    fn coordinates(&self, index: usize) -> Vec<f64> {
        coords2(&self.q_grid, &self.p_grid, index)
    }
}

impl Sampled for MarginalSlice {
    fn grid_signature(&self) -> String {
        format!("slice {:?} {:?}", self.params, self.x_grid)
    }
    fn samples(&self) -> Vec<Option<Complex64>> {
        real(&self.values)
    }
    fn coordinates(&self, index: usize) -> Vec<f64> {
        vec![self.x_grid.point(index)]
    }
}

impl Sampled for MarginalField {
    fn grid_signature(&self) -> String {
        format!(
            "field {:?} {:?} {:?}",
            self.mu_grid, self.nu_grid, self.x_grid
        )
    }
    fn samples(&self) -> Vec<Option<Complex64>> {
        let nx = self.x_grid.len;
        self.values
            .iter()
            .enumerate()
            .map(|(n, &v)| self.valid[n / nx].then_some(Complex64::new(v, 0.0)))
            .collect()
    }
    fn coordinates(&self, index: usize) -> Vec<f64> {
        let nx = self.x_grid.len;
        let mut c = coords2(&self.mu_grid, &self.nu_grid, index / nx);
        c.push(self.x_grid.point(index % nx));
        c
    }
}

impl Sampled for DensityMatrixGrid {
    fn grid_signature(&self) -> String {
        format!("density {:?}", self.q_grid)
    }
    fn samples(&self) -> Vec<Option<Complex64>> {
        self.values.iter().copied().map(Some).collect()
    }
    fn coordinates(&self, index: usize) -> Vec<f64> {
        coords2(&self.q_grid, &self.q_grid, index)
    }
}

impl Sampled for CharacteristicGrid {
    fn grid_signature(&self) -> String {
        format!("characteristic {:?} {:?}", self.a_grid, self.b_grid)
    }
    fn samples(&self) -> Vec<Option<Complex64>> {
        self.values.iter().copied().map(Some).collect()
    }
    fn coordinates(&self, index: usize) -> Vec<f64> {
        coords2(&self.a_grid, &self.b_grid, index)
    }
}

/// Compare two objects sampled on the same grid, over points valid in both.
pub fn compare_fields<S: Sampled + ?Sized>(a: &S, b: &S) -> Result<ComparisonReport> {
    let (sa, sb) = (a.grid_signature(), b.grid_signature());
    if sa != sb {
        return Err(Error::GridMismatch(format!("{sa} vs {sb}")));
    }
    let (va, vb) = (a.samples(), b.samples());
    let mut report = ComparisonReport {
        max_abs: 0.0,
        l2: 0.0,
        argmax_location: Vec::new(),
        n_points: 0,
    };
    let mut argmax = None;
    let mut sum_sq = 0.0;
    for (n, (x, y)) in va.iter().zip(&vb).enumerate() {
        if let (Some(x), Some(y)) = (x, y) {
            let d = (x - y).norm();
            // A NaN difference sticks as the maximum.
            let worse = argmax.is_none()
                || (!report.max_abs.is_nan() && (d.is_nan() || d > report.max_abs));
            if worse {
                report.max_abs = d;
                argmax = Some(n);
            }
            sum_sq += d * d;
            report.n_points += 1;
        }
    }
    if report.n_points == 0 {
        return Err(Error::GridMismatch("no common valid points".into()));
    }
    report.l2 = sum_sq.sqrt();
    report.argmax_location = argmax.map(|n| a.coordinates(n)).unwrap_or_default();
    Ok(report)
}

/// `∫ w dX` of a slice, held to `1 ± tol`.
pub fn check_slice_normalization(slice: &MarginalSlice, tol: &Tolerances) -> CheckResult {
    CheckResult::within("normalization", slice.integral(), 1.0, tol.normalization)
        .with("mu", slice.params.mu)
        .with("nu", slice.params.nu)
        .with("delta", slice.params.delta)
}

/// Worst `|∫ w dX - 1|` over the valid cells of a field.
pub fn check_field_normalization(field: &MarginalField, tol: &Tolerances) -> CheckResult {
    CheckResult::at_most(
        "normalization",
        field.worst_normalization_error(),
        tol.normalization,
    )
    .with("cells", field.valid.iter().filter(|v| **v).count())
}

/// `∫∫ W dq dp / 2π` of a Wigner field, held to `1 ± tol`.
pub fn check_wigner_normalization(field: &WignerField, tol: &Tolerances) -> CheckResult {
    CheckResult::within(
        "normalization",
        field.normalization(),
        1.0,
        tol.normalization,
    )
}

/// Marginal values stay above the quadrature floor.
pub fn check_positivity(values: &[f64], tol: &Tolerances) -> CheckResult {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    CheckResult::at_least("positivity", min, tol.positivity_floor)
}

/// Anything offering both a Wigner function and a marginal of the same state.
pub trait TomographySource: Sync {
    fn label(&self) -> String;
    fn wigner_value(&self, q: f64, p: f64) -> f64;
    fn marginal_value(&self, x: f64, params: &TomographyParams) -> f64;
}

impl TomographySource for StateSpec {
    fn label(&self) -> String {
        format!("{:?}(q0 = {}, p0 = {})", self.kind, self.q0, self.p0)
    }
    fn wigner_value(&self, q: f64, p: f64) -> f64 {
        self.wigner0(q, p)
    }
    fn marginal_value(&self, x: f64, params: &TomographyParams) -> f64 {
        self.marginal0(x, params.mu, params.nu, params.delta)
    }
}

struct AsMarginal<'a, S: ?Sized>(&'a S);
impl<S: TomographySource + ?Sized> MarginalFunction for AsMarginal<'_, S> {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64 {
        self.0.marginal_value(x, params)
    }
}

struct AsWigner<'a, S: ?Sized>(&'a S);
impl<S: TomographySource + ?Sized> WignerFunction for AsWigner<'_, S> {
    fn wigner(&self, q: f64, p: f64) -> f64 {
        self.0.wigner_value(q, p)
    }
}

/// Number of slice directions probed by the normalization and forward checks.
const PROBE_DIRECTIONS: usize = 8;

fn probe_params() -> impl Iterator<Item = TomographyParams> {
    (0..PROBE_DIRECTIONS).map(|n| {
        let phi = std::f64::consts::PI * n as f64 / PROBE_DIRECTIONS as f64;
        let r = 0.75 + 0.125 * n as f64;
        TomographyParams::new(r * phi.cos(), r * phi.sin(), 0.0)
    })
}

/// Forward and inverse pipeline on one source, in order: normalization,
/// forward_agreement, roundtrip_residual, hermiticity, trace,
/// min_eigenvalue, purity, s_invariance.
pub fn roundtrip_report<S: TomographySource + ?Sized>(
    source: &S,
    tol: &Tolerances,
) -> Result<Vec<CheckResult>> {
    let marginal = AsMarginal(source);
    let x_grid = default_x_grid();
    let label = source.label();
    let mut checks = Vec::new();

    let mut worst_norm: f64 = 0.0;
    let mut worst_forward: f64 = 0.0;
    let radon = RadonMarginal::new(AsWigner(source), LineQuadrature::default());
    for params in probe_params() {
        let slice = MarginalSlice::sample(&marginal, params, &x_grid)?;
        let err = (slice.integral() - 1.0).abs();
        worst_norm = if err.is_nan() {
            f64::NAN
        } else {
            worst_norm.max(err)
        };
        let forward = MarginalSlice::sample(&radon, params, &x_grid)?;
        let diff = compare_fields(&slice, &forward)?.max_abs;
        worst_forward = if diff.is_nan() {
            f64::NAN
        } else {
            worst_forward.max(diff)
        };
    }
    checks.push(CheckResult::at_most(
        "normalization",
        worst_norm,
        tol.normalization,
    ));
    checks.push(CheckResult::at_most(
        "forward_agreement",
        worst_forward,
        tol.forward,
    ));

    let chi = characteristic_from_marginal(
        &marginal,
        &default_chi_grid(),
        &default_chi_grid(),
        &default_unit_grid(),
    )?;
    let phase = UniformGrid::symmetric(5.0, 101)?;
    let rebuilt = wigner_from_characteristic(&chi, &phase, &phase)?;
    let direct = sample_wigner_field_from(source, &phase)?;
    let residual = compare_fields(&rebuilt, &direct)?.max_abs;
    checks.push(CheckResult::at_most(
        "roundtrip_residual",
        residual,
        tol.roundtrip,
    ));

    let q_grid = default_q_grid();
    let rho = density_matrix_from_marginal(&marginal, &q_grid, &ReconstructionConfig::with_s(1.0))?;
    checks.push(CheckResult::at_most(
        "hermiticity",
        rho.hermiticity_error(),
        tol.hermiticity,
    ));
    checks.push(CheckResult::at_most(
        "trace",
        (rho.trace() - 1.0).abs(),
        tol.trace,
    ));
    checks.push(CheckResult::at_least(
        "min_eigenvalue",
        rho.min_eigenvalue(),
        tol.min_eigenvalue,
    ));
    checks.push(CheckResult::within("purity", rho.purity(), 1.0, tol.purity));
    let rho2 =
        density_matrix_from_marginal(&marginal, &q_grid, &ReconstructionConfig::with_s(2.0))?;
    let s_diff = compare_fields(&rho, &rho2)?.max_abs;
    checks.push(CheckResult::at_most("s_invariance", s_diff, tol.s_invariance).with("s", "1 vs 2"));
    for c in &mut checks {
        c.context.insert("state".into(), label.clone());
    }
    Ok(checks)
}

fn sample_wigner_field_from<S: TomographySource + ?Sized>(
    source: &S,
    grid: &UniformGrid,
) -> Result<WignerField> {
    let values = grid
        .points()
        .into_iter()
        .flat_map(|q| grid.points().into_iter().map(move |p| (q, p)))
        .map(|(q, p)| source.wigner_value(q, p))
        .collect();
    WignerField::new(*grid, *grid, values)
}

/// First failing check, if any.
pub fn first_failure(checks: &[CheckResult]) -> Option<&CheckResult> {
    checks.iter().find(|c| !c.passed)
}

/// Catalog Wigner field check against its own sampling at `t`.
pub fn check_state_field(
    state: &StateSpec,
    grid: &UniformGrid,
    t: f64,
    dyn_kind: DynamicsKind,
    tol: &Tolerances,
) -> Result<CheckResult> {
    let field = sample_wigner_field(state, grid, grid, t, dyn_kind)?;
    Ok(check_wigner_normalization(&field, tol).with("state", state.label()))
}

fn potential_for(dyn_kind: DynamicsKind) -> PotentialSpec {
    match dyn_kind {
        DynamicsKind::Harmonic => PotentialSpec::harmonic(),
        _ => PotentialSpec::free(),
    }
}

/// Evolution checks for one state under free and harmonic motion: the
/// marginal of the transported Wigner function against the characteristic
/// solution, then the grid solver (65 x 65 x 257, dt = 0.01) against the
/// characteristic solution, its slice integrals and positivity. Free motion
/// widens the outer slices past the X window by t = π, so slice integrals
/// are compared with those of the exact field on the same window rather
/// than with 1.
pub fn evolution_report(state: &StateSpec, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    state.validate()?;
    let times = [0.3, 1.0, std::f64::consts::PI];
    let x_grid = UniformGrid::symmetric(6.0, 121)?;
    // Free motion shears the Wigner function well outside the default box.
    let line = LineQuadrature {
        half_length: 30.0,
        step: 0.01,
    };
    let directions = [(1.0, 0.0), (0.0, 1.0), (0.8, -0.6), (1.3, 0.9)];
    let box_grid = UniformGrid::symmetric(1.0, 65)?;
    let x_field = UniformGrid::symmetric(7.0, 257)?;
    let initial0 = state.marginal_at(0.0, DynamicsKind::Static);
    let initial = MarginalField::sample(&initial0, &box_grid, &box_grid, &x_field)?;
    let label = state.label();
    let mut checks = Vec::new();
    for dyn_kind in [DynamicsKind::Free, DynamicsKind::Harmonic] {
        let potential = potential_for(dyn_kind);
        let mut square: f64 = 0.0;
        for &t in &times {
            let wigner = evolve_wigner_reference(state, dyn_kind, t)?;
            let evolved = evolve_characteristics(initial0, &potential, t)?;
            for &(mu, nu) in &directions {
                let p = TomographyParams::new(mu, nu, 0.2);
                let a = radon_marginal(&wigner, p, &x_grid, &line)?;
                let b = MarginalSlice::sample(&evolved, p, &x_grid)?;
                square = nan_max(square, compare_fields(&a, &b)?.max_abs);
            }
        }
        checks.push(
            CheckResult::at_most("commuting_square", square, tol.forward)
                .with("state", &label)
                .with("dynamics", format!("{dyn_kind:?}")),
        );

        let coeffs = reduce_equation(&potential)?;
        let config = SolverConfig::new(0.01, times[2], Scheme::SemiLagrangian);
        let snaps = evolve_pde_snapshots(&initial, &coeffs, &config, &times)?;
        let (mut err, mut norm, mut min): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
        for (snap, &t) in snaps.iter().zip(&times) {
            let exact = evolve_characteristics(initial0, &potential, t)?;
            let exact = MarginalField::sample(&exact, &snap.mu_grid, &snap.nu_grid, &snap.x_grid)?;
            err = nan_max(err, compare_fields(snap, &exact)?.max_abs);
            norm = nan_max(norm, snap.worst_integral_gap(&exact)?);
            min = min.min(snap.min_valid());
        }
        let dyn_label = format!("{dyn_kind:?}");
        checks.push(
            CheckResult::at_most("pde_agreement", err, tol.pde)
                .with("state", &label)
                .with("dynamics", &dyn_label),
        );
        checks.push(
            CheckResult::at_most("pde_normalization", norm, tol.normalization)
                .with("state", &label)
                .with("dynamics", &dyn_label),
        );
        checks.push(
            CheckResult::at_least("pde_positivity", min, tol.pde_positivity_floor)
                .with("state", &label)
                .with("dynamics", &dyn_label),
        );
    }
    Ok(checks)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Point values and small pipelines of the catalog with known answers.
pub fn catalog_examples(tol: &Tolerances) -> Result<Vec<CheckResult>> {
    use std::f64::consts::PI;
    let exact = 1e-12;
    let origin = PhasePoint::new(0.0, 0.0);
    let ground = StateSpec::ground();
    let excited = StateSpec::excited_first();
    let cat = StateSpec::odd_cat(2f64.sqrt(), 0.0)?;
    let x_axis = TomographyParams::new(1.0, 0.0, 0.0);
    let x_grid = default_x_grid();
    let mut checks = vec![
        CheckResult::within(
            "excited_wigner_origin",
            wigner_eval(&excited, origin, 1.3, DynamicsKind::Harmonic)?,
            -2.0,
            exact,
        ),
        CheckResult::within(
            "coherent_wigner_peak",
            wigner_eval(
                &StateSpec::coherent(0.0, 0.0),
                origin,
                0.0,
                DynamicsKind::Static,
            )?,
            2.0,
            exact,
        ),
        CheckResult::within(
            "ground_rotation_invariance",
            wigner_eval(
                &ground,
                PhasePoint::new(1.0, 0.0),
                2.1,
                DynamicsKind::Harmonic,
            )?,
            2.0 * (-1.0f64).exp(),
            exact,
        ),
        CheckResult::within(
            "odd_cat_wigner_origin",
            wigner_eval(&cat, origin, 0.0, DynamicsKind::Static)?,
            -2.0,
            exact,
        ),
        CheckResult::within(
            "odd_cat_normalization_constant",
            cat_normalization(2f64.sqrt(), 0.0)?,
            (1f64.exp() / (4.0 * 1f64.sinh())).sqrt(),
            exact,
        ),
        CheckResult::within(
            "ground_marginal_origin",
            marginal_eval(&ground, &x_axis, 0.0, 0.0, DynamicsKind::Static)?,
            1.0 / PI.sqrt(),
            exact,
        ),
        CheckResult::within(
            "excited_marginal_zero",
            marginal_eval(
                &excited,
                &TomographyParams::new(0.4, -1.3, 0.7),
                0.7,
                0.0,
                DynamicsKind::Static,
            )?,
            0.0,
            exact,
        ),
        CheckResult::within(
            "excited_marginal_at_one",
            marginal_eval(&excited, &x_axis, 1.0, 0.0, DynamicsKind::Static)?,
            2.0 / PI.sqrt() * (-1.0f64).exp(),
            exact,
        ),
    ];

    let quarter = MarginalSlice::sample(
        &StateSpec::coherent(1.0, 0.0).marginal_at(PI / 2.0, DynamicsKind::Harmonic),
        x_axis,
        &x_grid,
    )?;
    let m = moments(&quarter)?;
    checks.push(CheckResult::within(
        "coherent_quarter_period_mean",
        m.mean,
        0.0,
        1e-9,
    ));
    checks.push(CheckResult::within(
        "coherent_quarter_period_variance",
        m.variance,
        0.5,
        1e-6,
    ));

    let radon = radon_marginal(
        &excited.wigner_at(0.0, DynamicsKind::Static),
        TomographyParams::rotated(0.7),
        &x_grid,
        &LineQuadrature::default(),
    )?;
    let closed = MarginalSlice::sample(
        &excited.marginal_at(0.0, DynamicsKind::Static),
        TomographyParams::rotated(0.7),
        &x_grid,
    )?;
    checks.push(CheckResult::at_most(
        "excited_radon_agreement",
        compare_fields(&radon, &closed)?.max_abs,
        tol.forward,
    ));
    checks.push(check_positivity(&radon.values, tol).with("slice", "excited marginal"));
    let field = sample_wigner_field(
        &excited,
        &default_phase_grid(),
        &default_phase_grid(),
        0.0,
        DynamicsKind::Static,
    )?;
    checks.push(CheckResult::within(
        "excited_wigner_minimum",
        field.min(),
        -2.0,
        exact,
    ));

    let free = reduce_equation(&PotentialSpec::free())?.to_string();
    let harmonic = reduce_equation(&PotentialSpec::harmonic())?.to_string();
    checks.push(
        CheckResult::within(
            "reduce_free",
            f64::from(u8::from(free != "d_t w = +1 mu d_nu w")),
            0.0,
            0.0,
        )
        .with("equation", free),
    );
    checks.push(
        CheckResult::within(
            "reduce_harmonic",
            f64::from(u8::from(harmonic != "d_t w = +1 mu d_nu w -1 nu d_mu w")),
            0.0,
            0.0,
        )
        .with("equation", harmonic),
    );

    let var = |s: &StateSpec| -> Result<f64> {
        Ok(moments(&MarginalSlice::sample(
            &s.marginal_at(0.0, DynamicsKind::Static),
            x_axis,
            &x_grid,
        )?)?
        .variance)
    };
    checks.push(CheckResult::within(
        "ground_variance",
        var(&ground)?,
        0.5,
        1e-6,
    ));
    checks.push(CheckResult::within(
        "excited_variance",
        var(&excited)?,
        1.5,
        1e-6,
    ));
    checks.push(CheckResult::within(
        "ground_uncertainty_product",
        uncertainty_product(&ground.marginal_at(0.0, DynamicsKind::Static), &x_grid)?,
        0.25,
        1e-6,
    ));
    checks.push(CheckResult::within(
        "excited_uncertainty_product",
        uncertainty_product(&excited.marginal_at(0.0, DynamicsKind::Static), &x_grid)?,
        2.25,
        1e-5,
    ));

    let q = default_q_grid();
    let rho = density_matrix_from_marginal(
        &ground.marginal_at(0.0, DynamicsKind::Static),
        &q,
        &ReconstructionConfig::default(),
    )?;
    let c = q
        .index_of(0.0, 1e-9)
        .ok_or_else(|| Error::InvalidGrid("q grid misses 0".into()))?;
    checks.push(CheckResult::within(
        "ground_density_origin",
        rho.at(c, c).re,
        1.0 / PI.sqrt(),
        tol.trace,
    ));
    Ok(checks)
}
