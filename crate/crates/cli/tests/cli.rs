use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use symtomo::state::sample_wigner_field;
use symtomo::tomography::{
    CharacteristicGrid, DensityMatrixGrid, MarginalField, MarginalSlice, ReconstructionConfig,
};
use symtomo::{DynamicsKind, StateSpec, TomographyParams, UniformGrid, WignerField};
use symtomo_cli::{Config, FieldData, FieldFile, FieldFileError};
use tempfile::TempDir;

fn symtomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symtomo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reduce_prints_equation_and_terms() {
    let out = symtomo(&["reduce", "--potential", "0,0,0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "d_t w = +1 mu d_nu w -1 nu d_mu w\n+1 mu d_nu w\n-1 nu d_mu w\n"
    );

    let free = symtomo(&["reduce", "--potential", "0,0,0"]);
    assert_eq!(stdout(&free), "d_t w = +1 mu d_nu w\n+1 mu d_nu w\n");

    let linear = symtomo(&["reduce", "--potential", "0,-0.8,0"]);
    assert_eq!(code(&linear), 0);
    assert!(
        stdout(&linear).lines().any(|l| l == "-0.8 nu d_X w"),
        "{}",
        stdout(&linear)
    );

    assert_eq!(code(&symtomo(&["reduce", "--potential", "0,0,0,1"])), 1);
    assert_eq!(code(&symtomo(&["reduce", "--potential", "0,zero,1"])), 2);
}

#[test]
fn excited_marginal_vanishes_at_origin() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "slice.csv");
    let run = symtomo(&[
        "marginal",
        "--state",
        "excited1",
        "--mu",
        "1",
        "--nu",
        "0",
        "--delta",
        "0",
        "--x-points",
        "1025",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let FieldData::MarginalSlice(slice) = FieldFile::read(&out).unwrap().data else {
        panic!("wrong kind")
    };
    let centre = slice.x_grid.index_of(0.0, 0.0).unwrap();
    assert_eq!(slice.values[centre], 0.0);
    assert!((slice.integral() - 1.0).abs() <= 1e-6);
    assert!(slice.min() >= 0.0);

    // The default 1024-point grid has no X = 0 sample.
    let default = path(&dir, "default.csv");
    symtomo(&[
        "marginal",
        "--state",
        "excited1",
        "--mu",
        "1",
        "--nu",
        "0",
        "--out",
        s(&default),
    ]);
    let FieldData::MarginalSlice(slice) = FieldFile::read(&default).unwrap().data else {
        panic!("wrong kind")
    };
    assert_eq!(slice.values.len(), 1024);
    assert!(slice.x_grid.index_of(0.0, 1e-6).is_none());
}

#[test]
fn radon_option_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    let common = [
        "marginal",
        "--state",
        "cat",
        "--q0",
        "1.4142135623730951",
        "--mu",
        "0.6",
        "--nu",
        "-0.8",
    ];
    assert_eq!(
        code(&symtomo(&[&common[..], &["--out", s(&a)]].concat())),
        0
    );
    assert_eq!(
        code(&symtomo(
            &[&common[..], &["--radon", "--out", s(&b)]].concat()
        )),
        0
    );
    let read = |p: &Path| match FieldFile::read(p).unwrap().data {
        FieldData::MarginalSlice(s) => s.values,
        _ => panic!("wrong kind"),
    };
    let worst = read(&a)
        .iter()
        .zip(read(&b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn wigner_file_roundtrip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "w.csv");
    let run = symtomo(&["state-wigner", "--state", "ground", "--out", s(&out)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let file = FieldFile::read(&out).unwrap();
    let g = symtomo::state::default_phase_grid();
    let direct =
        sample_wigner_field(&StateSpec::ground(), &g, &g, 0.0, DynamicsKind::Static).unwrap();
    assert_eq!(file.data, FieldData::Wigner(direct));
    assert_eq!(file.provenance["command"], "state-wigner");

    // Same flags, same bytes.
    let again = path(&dir, "w2.csv");
    symtomo(&["state-wigner", "--state", "ground", "--out", s(&again)]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

fn roundtrip(data: FieldData) {
    let file = FieldFile::new(data).with("note", "test");
    let mut bytes = Vec::new();
    file.write_to(&mut bytes).unwrap();
    let back = FieldFile::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back, file);
    // Bit patterns, including the sign of zero.
    let bits = |f: &FieldFile| -> Vec<u64> {
        match &f.data {
            FieldData::Wigner(w) => w.values.iter().map(|v| v.to_bits()).collect(),
            FieldData::MarginalSlice(w) => w.values.iter().map(|v| v.to_bits()).collect(),
            FieldData::MarginalField(w) => w.values.iter().map(|v| v.to_bits()).collect(),
            FieldData::DensityMatrix(r) => r
                .values
                .iter()
                .flat_map(|c| [c.re.to_bits(), c.im.to_bits()])
                .collect(),
            FieldData::Characteristic(c) => c
                .values
                .iter()
                .flat_map(|c| [c.re.to_bits(), c.im.to_bits()])
                .collect(),
        }
    };
    assert_eq!(bits(&back), bits(&file));
}

/// Awkward doubles: subnormals, extremes, negative zero, long mantissas.
fn awkward(n: usize) -> Vec<f64> {
    let pool = [
        5e-324,
        -2.2250738585072014e-308,
        f64::MAX,
        -0.0,
        0.1 + 0.2,
        1.0 / 3.0,
        -123456.789e-9,
        6.02214076e23,
        1e16,
        9.999999999999999e-6,
        std::f64::consts::PI,
    ];
    (0..n)
        .map(|i| pool[i % pool.len()] * if i % 7 == 0 { -1.0 } else { 1.0 })
        .collect()
}

#[test]
fn every_field_kind_roundtrips_bit_exact() {
    let a = UniformGrid::new(-1.3, 2.9, 5).unwrap();
    let b = UniformGrid::new(0.1, 0.7, 3).unwrap();
    let x = UniformGrid::new(-4.0, 4.0, 7).unwrap();
    roundtrip(FieldData::Wigner(
        WignerField::new(a, b, awkward(15)).unwrap(),
    ));
    roundtrip(FieldData::MarginalSlice(MarginalSlice {
        params: TomographyParams::new(0.3, -1.7, 0.25),
        x_grid: x,
        values: awkward(7),
        diagnostics: vec!["one".into(), "two, with a comma".into()],
    }));
    let mut field = MarginalField::from_values(a, b, x, awkward(105)).unwrap();
    field.valid[2] = !field.valid[2];
    roundtrip(FieldData::MarginalField(field));
    let complex: Vec<Complex64> = awkward(50)
        .chunks(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    roundtrip(FieldData::DensityMatrix(DensityMatrixGrid {
        q_grid: a,
        values: complex[..25].to_vec(),
        config: ReconstructionConfig::with_s(2.5),
        diagnostics: Vec::new(),
    }));
    roundtrip(FieldData::Characteristic(CharacteristicGrid {
        a_grid: a,
        b_grid: b,
        values: complex[..15].to_vec(),
        diagnostics: Vec::new(),
    }));
}

#[test]
fn non_finite_values_are_refused() {
    let g = UniformGrid::new(0.0, 1.0, 2).unwrap();
    let w = WignerField::new(g, g, vec![0.0, f64::NAN, 1.0, 2.0]).unwrap();
    let err = FieldFile::new(FieldData::Wigner(w))
        .write_to(Vec::new())
        .unwrap_err();
    assert!(matches!(err, FieldFileError::NonFinite { row: 1 }));
}

fn ground_field(dir: &TempDir) -> PathBuf {
    let out = path(dir, "field.csv");
    let run = symtomo(&["marginal", "--state", "ground", "--field", "--out", s(&out)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    out
}

#[test]
fn truncated_row_names_its_line() {
    let dir = TempDir::new().unwrap();
    let good = ground_field(&dir);
    let text = std::fs::read_to_string(&good).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    // Line numbers count the META line as 1 and the column header as 2.
    let victim = 500;
    let cut = lines[victim - 1].rfind(',').unwrap();
    lines[victim - 1].truncate(cut);
    let bad = path(&dir, "bad.csv");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();

    let err = FieldFile::read(&bad).unwrap_err();
    assert!(
        matches!(err, FieldFileError::Row { line: 500, .. }),
        "{err}"
    );
    assert!(err.to_string().starts_with("line 500:"), "{err}");

    let run = symtomo(&["invert", "--in", s(&bad), "--out", s(&path(&dir, "w.csv"))]);
    assert_eq!(code(&run), 1);
    assert!(stderr(&run).contains("line 500"), "{}", stderr(&run));

    // A file cut short after a complete row fails on the row count.
    let short = path(&dir, "short.csv");
    std::fs::write(
        &short,
        text.lines().take(1000).collect::<Vec<_>>().join("\n") + "\n",
    )
    .unwrap();
    assert!(matches!(
        FieldFile::read(&short),
        Err(FieldFileError::RowCount { found: 998, .. })
    ));
}

#[test]
fn malformed_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let good = path(&dir, "slice.csv");
    symtomo(&[
        "marginal",
        "--state",
        "ground",
        "--mu",
        "1",
        "--nu",
        "0",
        "--out",
        s(&good),
    ]);
    let text = std::fs::read_to_string(&good).unwrap();

    let write = |name: &str, body: String| {
        let p = path(&dir, name);
        std::fs::write(&p, body).unwrap();
        FieldFile::read(&p).unwrap_err()
    };
    let err = write(
        "v2.csv",
        text.replacen("\"schema_version\":1", "\"schema_version\":2", 1),
    );
    assert!(
        matches!(err, FieldFileError::SchemaVersion { found: 2 }),
        "{err}"
    );
    assert!(matches!(
        write(
            "nometa.csv",
            text.lines().skip(1).collect::<Vec<_>>().join("\n")
        ),
        FieldFileError::MissingMeta
    ));
    assert!(matches!(
        write("cols.csv", text.replacen("x,w", "x,value", 1)),
        FieldFileError::Columns { .. }
    ));
    let err = write("num.csv", text.replacen(",0.", ",zero.", 1));
    assert!(matches!(err, FieldFileError::Row { .. }), "{err}");
    // A coordinate that disagrees with the header grid.
    let err = write("coord.csv", text.replacen("\n-10,", "\n-11,", 1));
    assert!(matches!(err, FieldFileError::Row { line: 3, .. }), "{err}");
}

#[test]
fn marginal_field_feeds_invert_evolve_and_density_matrix() {
    let dir = TempDir::new().unwrap();
    let field_path = ground_field(&dir);
    let FieldData::MarginalField(initial) = FieldFile::read(&field_path).unwrap().data else {
        panic!("wrong kind")
    };

    let (w, chi) = (path(&dir, "w.csv"), path(&dir, "chi.csv"));
    let run = symtomo(&[
        "invert",
        "--in",
        s(&field_path),
        "--out",
        s(&w),
        "--characteristic",
        s(&chi),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let FieldData::Wigner(wigner) = FieldFile::read(&w).unwrap().data else {
        panic!("wrong kind")
    };
    let g = wigner.q_grid;
    let centre = g.index_of(0.0, 1e-9).unwrap();
    assert!(
        (wigner.at(centre, centre) - 2.0).abs() <= 1e-2,
        "{}",
        wigner.at(centre, centre)
    );
    assert!((wigner.normalization() - 1.0).abs() <= 1e-3);

    // The characteristic file inverts to the same Wigner function.
    let w2 = path(&dir, "w2.csv");
    assert_eq!(
        code(&symtomo(&["invert", "--in", s(&chi), "--out", s(&w2)])),
        0
    );
    assert_eq!(
        FieldFile::read(&w2).unwrap().data,
        FieldData::Wigner(wigner)
    );

    // The ground state is stationary under harmonic motion.
    for solver in ["char", "pde"] {
        let out = path(&dir, &format!("evolved-{solver}.csv"));
        let run = symtomo(&[
            "evolve",
            "--in",
            s(&field_path),
            "--dyn",
            "harmonic",
            "--t",
            "1",
            "--solver",
            solver,
            "--dt",
            "0.02",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
        let file = FieldFile::read(&out).unwrap();
        assert_eq!(file.provenance["solver"], solver);
        let FieldData::MarginalField(evolved) = file.data else {
            panic!("wrong kind")
        };
        let worst = (0..evolved.cells())
            .filter(|&c| evolved.valid[c])
            .flat_map(|c| {
                let n = evolved.x_grid.len;
                (c * n..(c + 1) * n).map(|k| (evolved.values[k] - initial.values[k]).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-2, "{solver}: {worst}");
    }

    let linear = path(&dir, "linear.csv");
    let run = symtomo(&[
        "evolve",
        "--in",
        s(&field_path),
        "--dyn",
        "linear:0.5",
        "--t",
        "0.5",
        "--out",
        s(&linear),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let rho = path(&dir, "rho.csv");
    let run = symtomo(&[
        "density-matrix",
        "--in",
        s(&field_path),
        "--s",
        "2",
        "--out",
        s(&rho),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let FieldData::DensityMatrix(rho) = FieldFile::read(&rho).unwrap().data else {
        panic!("wrong kind")
    };
    assert_eq!(rho.config.s, 2.0);
    let c = rho.q_grid.index_of(0.0, 1e-9).unwrap();
    assert!((rho.at(c, c).re - 1.0 / std::f64::consts::PI.sqrt()).abs() <= 1e-3);
    assert!((rho.trace() - 1.0).abs() <= 1e-3);
}

#[test]
fn wrong_inputs_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let w = path(&dir, "w.csv");
    symtomo(&["state-wigner", "--state", "excited1", "--out", s(&w)]);
    let out = path(&dir, "x.csv");
    let run = symtomo(&[
        "evolve",
        "--in",
        s(&w),
        "--dyn",
        "free",
        "--t",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 2);
    assert!(
        stderr(&run).contains("expected marginal_field"),
        "{}",
        stderr(&run)
    );
    assert_eq!(
        code(&symtomo(&["invert", "--in", s(&w), "--out", s(&out)])),
        2
    );
    assert_eq!(
        code(&symtomo(&[
            "evolve",
            "--in",
            s(&w),
            "--dyn",
            "quartic",
            "--t",
            "1",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(
        code(&symtomo(&[
            "state-wigner",
            "--state",
            "ground",
            "--bogus",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(
        code(&symtomo(&[
            "state-wigner",
            "--state",
            "squeezed",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(
        code(&symtomo(&[
            "marginal",
            "--state",
            "ground",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(code(&symtomo(&["frobnicate"])), 2);
    assert_eq!(code(&symtomo(&[])), 2);
    // A degenerate cat is a valid invocation that fails validation.
    assert_eq!(
        code(&symtomo(&[
            "state-wigner",
            "--state",
            "cat",
            "--out",
            s(&out)
        ])),
        1
    );
    assert!(!out.exists());
}

#[test]
fn help_exits_zero_everywhere() {
    for sub in [
        &[][..],
        &["state-wigner"],
        &["marginal"],
        &["evolve"],
        &["invert"],
        &["density-matrix"],
        &["reduce"],
        &["check"],
    ] {
        let out = symtomo(&[sub, &["--help"]].concat());
        assert_eq!(code(&out), 0, "{sub:?}");
        assert!(stdout(&out).contains("Usage:"), "{sub:?}");
    }
}

#[test]
fn config_file_sets_grids() {
    let dir = TempDir::new().unwrap();
    let config = path(&dir, "config.json");
    std::fs::write(
        &config,
        r#"{"phase_grid": {"start": -3.0, "end": 3.0, "len": 31}}"#,
    )
    .unwrap();
    let out = path(&dir, "w.csv");
    let run = symtomo(&[
        "--config",
        s(&config),
        "state-wigner",
        "--state",
        "excited1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let FieldData::Wigner(w) = FieldFile::read(&out).unwrap().data else {
        panic!("wrong kind")
    };
    assert_eq!(w.q_grid, UniformGrid::new(-3.0, 3.0, 31).unwrap());
    assert_eq!(w.at(15, 15), -2.0);

    let loaded = Config::load(&config).unwrap();
    assert_eq!(loaded.x_grid, Config::default().x_grid);

    std::fs::write(
        &config,
        r#"{"phase_grd": {"start": -3.0, "end": 3.0, "len": 31}}"#,
    )
    .unwrap();
    let run = symtomo(&[
        "--config",
        s(&config),
        "state-wigner",
        "--state",
        "ground",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 2);
    std::fs::write(
        &config,
        r#"{"q_grid": {"start": 3.0, "end": -3.0, "len": 31}}"#,
    )
    .unwrap();
    assert!(Config::load(&config).is_err());
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn paper_examples_suite_passes() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "report.json");
    let run = symtomo(&["check", "--suite", "paper-examples", "--report", s(&out)]);
    assert_eq!(code(&run), 0, "{}{}", stdout(&run), stderr(&run));
    let r = report(&out);
    assert_eq!(r["suite"], "paper-examples");
    assert_eq!(r["passed"], true);
    assert_eq!(r["n_failed"], 0);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), r["n_checks"].as_u64().unwrap() as usize);
    for name in [
        "excited_wigner_origin",
        "odd_cat_wigner_origin",
        "purity",
        "commuting_square",
        "pde_agreement",
    ] {
        assert!(checks.iter().any(|c| c["name"] == name), "{name}");
    }
}

#[test]
fn failed_checks_exit_one_and_still_write_the_report() {
    let dir = TempDir::new().unwrap();
    let config = path(&dir, "tight.json");
    std::fs::write(&config, r#"{"tolerances": {"roundtrip": 1e-16}}"#).unwrap();
    let out = path(&dir, "report.json");
    let run = symtomo(&[
        "--config",
        s(&config),
        "check",
        "--suite",
        "roundtrip",
        "--state",
        "coherent",
        "--q0",
        "0.5",
        "--report",
        s(&out),
    ]);
    assert_eq!(code(&run), 1, "{}", stderr(&run));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    let failed: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["roundtrip_residual"]);
    assert_eq!(r["tolerances"]["roundtrip"], 1e-16);
    assert!(stdout(&run).contains("[FAIL] roundtrip_residual"));
}
