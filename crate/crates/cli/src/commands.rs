use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use symtomo::evolution::{
    evolve_characteristics, evolve_pde, reduce_equation, PotentialSpec, Scheme, SolverConfig,
};
use symtomo::state::sample_wigner_field;
use symtomo::tomography::{
    characteristic_from_marginal, density_matrix_from_marginal, radon_marginal,
    wigner_from_characteristic, MarginalField, MarginalSlice, ReconstructionConfig,
};
use symtomo::verify::{
    catalog_examples, evolution_report, roundtrip_report, CheckResult, Tolerances,
};
use symtomo::{DynamicsKind, StateSpec, TomographyParams};

use crate::config::Config;
use crate::field_file::{format_f64 as num, FieldData, FieldFile, FieldKind};

#[derive(Debug, Parser)]
#[command(
    name = "symtomo",
    version,
    about = "Symplectic tomography: Wigner functions, marginals, density matrices and their evolution"
)]
struct Cli {
    /// JSON file pre-setting grids, quadrature and tolerances.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the Wigner function of a catalog state on the phase grid.
    #[command(allow_negative_numbers = true)]
    StateWigner(StateWignerArgs),
    /// Sample a marginal slice, or with --field a whole marginal field.
    #[command(allow_negative_numbers = true)]
    Marginal(MarginalArgs),
    /// Evolve a marginal field in time.
    #[command(allow_negative_numbers = true)]
    Evolve(EvolveArgs),
    /// Rebuild the Wigner function from a marginal field or characteristic function.
    Invert(InvertArgs),
    /// Reconstruct the position-space density matrix from a marginal field.
    #[command(allow_negative_numbers = true)]
    DensityMatrix(DensityArgs),
    /// Print the evolution equation of the marginal for a potential.
    #[command(allow_negative_numbers = true)]
    Reduce(ReduceArgs),
    /// Run a verification suite and write a JSON report.
    #[command(allow_negative_numbers = true)]
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StateName {
    Ground,
    Excited1,
    Coherent,
    Cat,
}

#[derive(Debug, Args)]
struct StateArgs {
    #[arg(long, value_enum)]
    state: StateName,
    /// Displacement of the coherent state or of the cat components.
    #[arg(long, default_value_t = 0.0)]
    q0: f64,
    #[arg(long, default_value_t = 0.0)]
    p0: f64,
}

impl StateArgs {
    fn spec(&self) -> Result<StateSpec, CliError> {
        state_spec(self.state, self.q0, self.p0)
    }
}

fn state_spec(name: StateName, q0: f64, p0: f64) -> Result<StateSpec, CliError> {
    let spec = match name {
        StateName::Ground => StateSpec::ground(),
        StateName::Excited1 => StateSpec::excited_first(),
        StateName::Coherent => StateSpec::coherent(q0, p0),
        StateName::Cat => StateSpec::odd_cat(q0, p0)?,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DynArg {
    Static,
    Free,
    Harmonic,
}

impl From<DynArg> for DynamicsKind {
    fn from(d: DynArg) -> Self {
        match d {
            DynArg::Static => DynamicsKind::Static,
            DynArg::Free => DynamicsKind::Free,
            DynArg::Harmonic => DynamicsKind::Harmonic,
        }
    }
}

#[derive(Debug, Args)]
struct TimeArgs {
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    #[arg(long = "dyn", value_enum, default_value_t = DynArg::Static)]
    dynamics: DynArg,
}

#[derive(Debug, Args)]
struct StateWignerArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    time: TimeArgs,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MarginalArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, required_unless_present = "field", conflicts_with = "field")]
    mu: Option<f64>,
    #[arg(long, required_unless_present = "field", conflicts_with = "field")]
    nu: Option<f64>,
    #[arg(long, default_value_t = 0.0, conflicts_with = "field")]
    delta: f64,
    #[command(flatten)]
    time: TimeArgs,
    /// Sample the whole (mu, nu, X) field on the configured grids.
    #[arg(long)]
    field: bool,
    /// Integrate the Wigner function along lines instead of using the closed form.
    #[arg(long, conflicts_with = "field")]
    radon: bool,
    /// Number of X samples, overriding the configured slice grid's count;
    /// an odd count puts X = 0 on the grid.
    #[arg(long, conflicts_with = "field")]
    x_points: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// Potential for `evolve`: `free`, `harmonic` or `linear:c1`.
#[derive(Debug, Clone, PartialEq)]
struct DynSpec {
    label: String,
    potential: PotentialSpec,
}

fn parse_dyn(s: &str) -> Result<DynSpec, String> {
    let potential = match s {
        "free" => PotentialSpec::free(),
        "harmonic" => PotentialSpec::harmonic(),
        _ => {
            let c1 = s
                .strip_prefix("linear:")
                .ok_or_else(|| format!("expected free, harmonic or linear:<c1>, got {s:?}"))?;
            let c1: f64 = c1
                .parse()
                .map_err(|_| format!("bad linear coefficient {c1:?}"))?;
            if !c1.is_finite() {
                return Err(format!("bad linear coefficient {c1}"));
            }
            PotentialSpec::linear(c1)
        }
    };
    Ok(DynSpec {
        label: s.to_owned(),
        potential,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// Exact transport along characteristics.
    Char,
    /// Grid solver.
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    SemiLagrangian,
    Upwind,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    /// A marginal_field file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long = "dyn", value_parser = parse_dyn, value_name = "free|harmonic|linear:c1")]
    dynamics: DynSpec,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value_t = Solver::Char)]
    solver: Solver,
    /// Time step of the grid solver.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::SemiLagrangian)]
    scheme: SchemeArg,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InvertArgs {
    /// A marginal_field or characteristic file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write the intermediate characteristic function.
    #[arg(long, value_name = "FILE")]
    characteristic: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DensityArgs {
    /// A marginal_field file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Free kernel parameter, nonzero.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// Coefficients of V(q) = c0 + c1 q + c2 q^2.
    #[arg(long, value_name = "c0,c1,c2")]
    potential: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Roundtrip,
    Evolution,
    PaperExamples,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Restrict the suite to one state; defaults to the whole catalog.
    #[arg(long, value_enum)]
    state: Option<StateName>,
    #[arg(long, default_value_t = 0.0, requires = "state")]
    q0: f64,
    #[arg(long, default_value_t = 0.0, requires = "state")]
    p0: f64,
    #[arg(long, value_name = "FILE")]
    report: PathBuf,
}

#[derive(Debug)]
enum CliError {
    /// Bad invocation; exit code 2.
    Usage(String),
    /// Failed computation or validation; exit code 1.
    Failure(String),
}

impl From<symtomo::Error> for CliError {
    fn from(e: symtomo::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<crate::field_file::FieldFileError> for CliError {
    fn from(e: crate::field_file::FieldFileError) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Parse `args` (program name first), run the subcommand and map the outcome
/// to an exit code: 0 success, 1 failed validation or computation, 2 usage.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(CliError::Usage)?,
        None => Config::default(),
    };
    match cli.command {
        Command::StateWigner(a) => state_wigner(&config, a),
        Command::Marginal(a) => marginal(&config, a),
        Command::Evolve(a) => evolve(a),
        Command::Invert(a) => invert(&config, a),
        Command::DensityMatrix(a) => density_matrix(&config, a),
        Command::Reduce(a) => reduce(a),
        Command::Check(a) => check(&config, a),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn save(file: &FieldFile, path: &Path, summary: String) -> Result<(), CliError> {
    file.write(path)?;
    println!(
        "wrote {} to {}: {summary}",
        file.kind().name(),
        path.display()
    );
    Ok(())
}

fn state_wigner(config: &Config, a: StateWignerArgs) -> Result<(), CliError> {
    let state = a.state.spec()?;
    let g = config.phase_grid;
    let field = sample_wigner_field(&state, &g, &g, a.time.t, a.time.dynamics.into())?;
    let summary = format!(
        "{0}x{0} points, min {1}, integral/(2π) {2}",
        g.len,
        num(field.min()),
        num(field.normalization())
    );
    let file = FieldFile::new(FieldData::Wigner(field))
        .with("command", "state-wigner")
        .with("state", state)
        .with("t", a.time.t)
        .with("dynamics", DynamicsKind::from(a.time.dynamics));
    save(&file, &a.out, summary)
}

fn marginal(config: &Config, a: MarginalArgs) -> Result<(), CliError> {
    let state = a.state.spec()?;
    let (t, dyn_kind) = (a.time.t, DynamicsKind::from(a.time.dynamics));
    let (file, summary) = if a.field {
        let g = config.field_direction_grid;
        let field = MarginalField::sample(
            &state.marginal_at(t, dyn_kind),
            &g,
            &g,
            &config.field_x_grid,
        )?;
        let summary = format!(
            "{0}x{0}x{1} points, worst |∫w dX - 1| {2}",
            g.len,
            config.field_x_grid.len,
            num(field.worst_normalization_error())
        );
        (FieldFile::new(FieldData::MarginalField(field)), summary)
    } else {
        let params =
            TomographyParams::new(a.mu.unwrap_or_default(), a.nu.unwrap_or_default(), a.delta);
        let mut x_grid = config.x_grid;
        if let Some(n) = a.x_points {
            x_grid = symtomo::UniformGrid::new(x_grid.start, x_grid.end, n)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let slice = if a.radon {
            radon_marginal(&state.wigner_at(t, dyn_kind), params, &x_grid, &config.line)?
        } else {
            MarginalSlice::sample(&state.marginal_at(t, dyn_kind), params, &x_grid)?
        };
        let summary = format!(
            "{} points, ∫w dX {}, min {}",
            slice.values.len(),
            num(slice.integral()),
            num(slice.min())
        );
        let method = if a.radon { "radon" } else { "closed_form" };
        (
            FieldFile::new(FieldData::MarginalSlice(slice)).with("method", method),
            summary,
        )
    };
    let file = file
        .with("command", "marginal")
        .with("state", state)
        .with("t", t)
        .with("dynamics", dyn_kind);
    save(&file, &a.out, summary)
}

fn read_kind(path: &Path, accepted: &[FieldKind]) -> Result<FieldFile, CliError> {
    let file = FieldFile::read(path)?;
    if !accepted.contains(&file.kind()) {
        let names: Vec<&str> = accepted.iter().map(|k| k.name()).collect();
        return Err(CliError::Usage(format!(
            "{} holds a {} field; expected {}",
            path.display(),
            file.kind().name(),
            names.join(" or ")
        )));
    }
    Ok(file)
}

fn read_marginal_field(path: &Path) -> Result<(MarginalField, FieldFile), CliError> {
    let file = read_kind(path, &[FieldKind::MarginalField])?;
    match &file.data {
        FieldData::MarginalField(f) => Ok((f.clone(), file)),
        _ => unreachable!("kind checked above"),
    }
}

fn evolve(a: EvolveArgs) -> Result<(), CliError> {
    let (initial, source) = read_marginal_field(&a.input)?;
    let potential = &a.dynamics.potential;
    let evolved = match a.solver {
        Solver::Char => {
            let flow = evolve_characteristics(&initial, potential, a.t)?;
            MarginalField::sample(&flow, &initial.mu_grid, &initial.nu_grid, &initial.x_grid)?
        }
        Solver::Pde => {
            let scheme = match a.scheme {
                SchemeArg::SemiLagrangian => Scheme::SemiLagrangian,
                SchemeArg::Upwind => Scheme::Upwind,
            };
            let coeffs = reduce_equation(potential)?;
            evolve_pde(&initial, &coeffs, &SolverConfig::new(a.dt, a.t, scheme))?
        }
    };
    let summary = format!(
        "worst |∫w dX - 1| {}, min {}",
        num(evolved.worst_normalization_error()),
        evolved.min_valid()
    );
    let mut file = FieldFile::new(FieldData::MarginalField(evolved))
        .with("command", "evolve")
        .with("dynamics", &a.dynamics.label)
        .with("t", a.t)
        .with("solver", format!("{:?}", a.solver).to_lowercase())
        .with("source", &source.provenance);
    if a.solver == Solver::Pde {
        file = file
            .with("dt", a.dt)
            .with("scheme", format!("{:?}", a.scheme));
    }
    save(&file, &a.out, summary)
}

fn invert(config: &Config, a: InvertArgs) -> Result<(), CliError> {
    let source = read_kind(
        &a.input,
        &[FieldKind::MarginalField, FieldKind::Characteristic],
    )?;
    let chi = match &source.data {
        FieldData::Characteristic(chi) => chi.clone(),
        FieldData::MarginalField(field) => {
            let chi = characteristic_from_marginal(
                field,
                &config.chi_grid,
                &config.chi_grid,
                &config.unit_grid,
            )?;
            if let Some(path) = &a.characteristic {
                let file = FieldFile::new(FieldData::Characteristic(chi.clone()))
                    .with("command", "invert")
                    .with("source", &source.provenance);
                save(
                    &file,
                    path,
                    format!("boundary max |χ| {}", num(chi.boundary_max())),
                )?;
            }
            chi
        }
        _ => unreachable!("kind checked above"),
    };
    let g = config.phase_grid;
    let wigner = wigner_from_characteristic(&chi, &g, &g)?;
    let summary = format!(
        "min {}, integral/(2π) {}",
        num(wigner.min()),
        num(wigner.normalization())
    );
    let file = FieldFile::new(FieldData::Wigner(wigner))
        .with("command", "invert")
        .with("source", &source.provenance);
    save(&file, &a.out, summary)
}

fn density_matrix(config: &Config, a: DensityArgs) -> Result<(), CliError> {
    let (field, source) = read_marginal_field(&a.input)?;
    let recon = ReconstructionConfig {
        s: a.s.unwrap_or(config.reconstruction.s),
        ..config.reconstruction
    };
    let rho = density_matrix_from_marginal(&field, &config.q_grid, &recon)?;
    let summary = format!(
        "trace {}, purity {}, hermiticity error {}",
        num(rho.trace()),
        num(rho.purity()),
        rho.hermiticity_error()
    );
    let file = FieldFile::new(FieldData::DensityMatrix(rho))
        .with("command", "density-matrix")
        .with("source", &source.provenance);
    save(&file, &a.out, summary)
}

fn reduce(a: ReduceArgs) -> Result<(), CliError> {
    let potential: PotentialSpec = a
        .potential
        .parse()
        .map_err(|e: symtomo::Error| CliError::Usage(e.to_string()))?;
    let coeffs = reduce_equation(&potential)?;
    println!("{coeffs}");
    for term in &coeffs.terms {
        println!("{term}");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    suite: Suite,
    passed: bool,
    n_checks: usize,
    n_failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    tolerances: &'a Tolerances,
    checks: Vec<CheckResult>,
}

impl Serialize for Suite {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(
            self.to_possible_value()
                .expect("no skipped variants")
                .get_name(),
        )
    }
}

fn catalog_states() -> Vec<StateSpec> {
    vec![
        StateSpec::ground(),
        StateSpec::excited_first(),
        StateSpec::coherent(1.0, -0.5),
        StateSpec::odd_cat(2f64.sqrt(), 0.0).expect("nonzero displacement"),
    ]
}

fn run_suite(
    suite: Suite,
    states: &[StateSpec],
    tol: &Tolerances,
) -> symtomo::Result<Vec<CheckResult>> {
    let mut checks = Vec::new();
    if suite == Suite::PaperExamples {
        checks.extend(catalog_examples(tol)?);
    }
    if matches!(suite, Suite::Roundtrip | Suite::PaperExamples) {
        for s in states {
            checks.extend(roundtrip_report(s, tol)?);
        }
    }
    if matches!(suite, Suite::Evolution | Suite::PaperExamples) {
        for s in states {
            checks.extend(evolution_report(s, tol)?);
        }
    }
    Ok(checks)
}

fn check(config: &Config, a: CheckArgs) -> Result<(), CliError> {
    let states = match a.state {
        Some(name) => vec![state_spec(name, a.q0, a.p0)?],
        None => catalog_states(),
    };
    let tol = &config.tolerances;
    let (checks, error) = match run_suite(a.suite, &states, tol) {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    for c in &checks {
        let context: Vec<String> = c.context.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "[{}] {} measured {:e} threshold {:e} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold,
            context.join(" ")
        );
    }
    let n_failed = checks.iter().filter(|c| !c.passed).count();
    let passed = error.is_none() && n_failed == 0;
    let report = Report {
        suite: a.suite,
        passed,
        n_checks: checks.len(),
        n_failed,
        error: error.clone(),
        tolerances: tol,
        checks,
    };
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Failure(e.to_string()))?;
    std::fs::write(&a.report, json + "\n")
        .map_err(|e| CliError::Failure(format!("{}: {e}", a.report.display())))?;
    println!(
        "{} of {} checks passed; report in {}",
        report.n_checks - n_failed,
        report.n_checks,
        a.report.display()
    );
    match (error, n_failed) {
        (Some(e), _) => Err(CliError::Failure(e)),
        (None, 0) => Ok(()),
        (None, n) => Err(CliError::Failure(format!("{n} checks failed"))),
    }
}
