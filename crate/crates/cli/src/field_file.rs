//! Field files: one `#META {json}` line, a CSV header row, then one data row
//! per grid point in row-major order. Floats are written in Rust's shortest
//! round-trip form, so finite values survive a write/read cycle bit for bit.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use symtomo::tomography::{
    CharacteristicGrid, DensityMatrixGrid, MarginalField, MarginalSlice, ReconstructionConfig,
};
use symtomo::{TomographyParams, UniformGrid, WignerField};

pub const SCHEMA_VERSION: u32 = 1;
const META_PREFIX: &str = "#META ";

#[derive(Debug, thiserror::Error)]
pub enum FieldFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing `#META` header line")]
    MissingMeta,
    #[error("bad metadata: {0}")]
    Meta(#[from] serde_json::Error),
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("metadata lacks grid `{0}`")]
    MissingGrid(&'static str),
    #[error("metadata lacks `{0}`")]
    MissingEntry(&'static str),
    #[error("expected columns {expected:?}, found {found:?}")]
    Columns {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("non-finite value at data row {row}")]
    NonFinite { row: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Field(#[from] symtomo::Error),
}

pub type Result<T> = std::result::Result<T, FieldFileError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Wigner,
    MarginalSlice,
    MarginalField,
    DensityMatrix,
    Characteristic,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Wigner => "wigner",
            FieldKind::MarginalSlice => "marginal_slice",
            FieldKind::MarginalField => "marginal_field",
            FieldKind::DensityMatrix => "density_matrix",
            FieldKind::Characteristic => "characteristic",
        }
    }

    fn grid_names(self) -> &'static [&'static str] {
        match self {
            FieldKind::Wigner => &["q", "p"],
            FieldKind::MarginalSlice => &["x"],
            FieldKind::MarginalField => &["mu", "nu", "x"],
            FieldKind::DensityMatrix => &["q"],
            FieldKind::Characteristic => &["a", "b"],
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            FieldKind::Wigner => &["q", "p", "w"],
            FieldKind::MarginalSlice => &["x", "w"],
            FieldKind::MarginalField => &["mu", "nu", "x", "w", "valid"],
            FieldKind::DensityMatrix => &["q", "q_prime", "re_rho", "im_rho"],
            FieldKind::Characteristic => &["a", "b", "re_chi", "im_chi"],
        }
    }

    /// Number of leading coordinate columns.
    fn coordinate_count(self) -> usize {
        match self {
            FieldKind::Wigner | FieldKind::DensityMatrix | FieldKind::Characteristic => 2,
            FieldKind::MarginalSlice => 1,
            FieldKind::MarginalField => 3,
        }
    }
}

/// The `#META` line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub field_kind: FieldKind,
    pub grids: BTreeMap<String, UniformGrid>,
    /// Slice parameters of a `marginal_slice`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<TomographyParams>,
    /// Kernel settings of a `density_matrix`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionConfig>,
    /// How the field was made: command, state, dynamics, time and so on.
    #[serde(default)]
    pub provenance: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Wigner(WignerField),
    MarginalSlice(MarginalSlice),
    MarginalField(MarginalField),
    DensityMatrix(DensityMatrixGrid),
    Characteristic(CharacteristicGrid),
}

impl FieldData {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldData::Wigner(_) => FieldKind::Wigner,
            FieldData::MarginalSlice(_) => FieldKind::MarginalSlice,
            FieldData::MarginalField(_) => FieldKind::MarginalField,
            FieldData::DensityMatrix(_) => FieldKind::DensityMatrix,
            FieldData::Characteristic(_) => FieldKind::Characteristic,
        }
    }

    fn grids(&self) -> Vec<UniformGrid> {
        match self {
            FieldData::Wigner(f) => vec![f.q_grid, f.p_grid],
            FieldData::MarginalSlice(f) => vec![f.x_grid],
            FieldData::MarginalField(f) => vec![f.mu_grid, f.nu_grid, f.x_grid],
            FieldData::DensityMatrix(f) => vec![f.q_grid],
            FieldData::Characteristic(f) => vec![f.a_grid, f.b_grid],
        }
    }

    fn diagnostics(&self) -> &[String] {
        match self {
            FieldData::Wigner(f) => &f.diagnostics,
            FieldData::MarginalSlice(f) => &f.diagnostics,
            FieldData::MarginalField(f) => &f.diagnostics,
            FieldData::DensityMatrix(f) => &f.diagnostics,
            FieldData::Characteristic(f) => &f.diagnostics,
        }
    }

    /// Grid shape, outermost first. A density matrix uses its q grid twice.
    fn shape(&self) -> Vec<UniformGrid> {
        match self {
            FieldData::DensityMatrix(f) => vec![f.q_grid, f.q_grid],
            _ => self.grids(),
        }
    }

    /// Value columns of row `r`.
    fn values(&self, r: usize) -> Vec<f64> {
        match self {
            FieldData::Wigner(f) => vec![f.values[r]],
            FieldData::MarginalSlice(f) => vec![f.values[r]],
            FieldData::MarginalField(f) => {
                vec![
                    f.values[r],
                    if f.valid[r / f.x_grid.len] { 1.0 } else { 0.0 },
                ]
            }
            FieldData::DensityMatrix(f) => vec![f.values[r].re, f.values[r].im],
            FieldData::Characteristic(f) => vec![f.values[r].re, f.values[r].im],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub data: FieldData,
    pub provenance: BTreeMap<String, serde_json::Value>,
}

impl FieldFile {
    pub fn new(data: FieldData) -> Self {
        Self {
            data,
            provenance: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).expect("provenance values serialize");
        self.provenance.insert(key.into(), value);
        self
    }

    pub fn kind(&self) -> FieldKind {
        self.data.kind()
    }

    pub fn meta(&self) -> Meta {
        let kind = self.kind();
        let grids = kind
            .grid_names()
            .iter()
            .map(|n| n.to_string())
            .zip(self.data.grids())
            .collect();
        Meta {
            schema_version: SCHEMA_VERSION,
            field_kind: kind,
            grids,
            params: match &self.data {
                FieldData::MarginalSlice(s) => Some(s.params),
                _ => None,
            },
            reconstruction: match &self.data {
                FieldData::DensityMatrix(d) => Some(d.config),
                _ => None,
            },
            provenance: self.provenance.clone(),
            diagnostics: self.data.diagnostics().to_vec(),
        }
    }

    pub fn write_to(&self, out: impl Write) -> Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "{META_PREFIX}{}", serde_json::to_string(&self.meta())?)?;
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(self.kind().columns())?;
        let shape = self.data.shape();
        let mut coords = vec![0.0; shape.len()];
        let mut row: Vec<String> = Vec::new();
        for r in 0..shape.iter().map(|g| g.len).product() {
            fill_coordinates(&shape, r, &mut coords);
            let values = self.data.values(r);
            if values.iter().any(|v| !v.is_finite()) {
                return Err(FieldFileError::NonFinite { row: r });
            }
            row.clear();
            row.extend(coords.iter().chain(&values).map(|&v| format_f64(v)));
            csv.write_record(&row)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(File::create(path)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }

    pub fn read_from(input: impl Read) -> Result<Self> {
        let mut input = BufReader::new(input);
        let mut first = String::new();
        input.read_line(&mut first)?;
        let json = first
            .trim_end()
            .strip_prefix(META_PREFIX)
            .ok_or(FieldFileError::MissingMeta)?;
        let probe: serde_json::Value = serde_json::from_str(json)?;
        let found = probe
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or(FieldFileError::MissingEntry("schema_version"))?;
        if found != u64::from(SCHEMA_VERSION) {
            return Err(FieldFileError::SchemaVersion {
                found: u32::try_from(found).unwrap_or(u32::MAX),
            });
        }
        let meta: Meta = serde_json::from_value(probe)?;
        let kind = meta.field_kind;
        let grids = kind
            .grid_names()
            .iter()
            .map(|&name| {
                let g = meta
                    .grids
                    .get(name)
                    .ok_or(FieldFileError::MissingGrid(name))?;
                Ok(UniformGrid::new(g.start, g.end, g.len)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let shape = match kind {
            FieldKind::DensityMatrix => vec![grids[0], grids[0]],
            _ => grids.clone(),
        };
        let expected_rows: usize = shape.iter().map(|g| g.len).product();

        let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
        if header != kind.columns() {
            return Err(FieldFileError::Columns {
                expected: kind.columns().iter().map(|c| c.to_string()).collect(),
                found: header,
            });
        }
        let n_coords = kind.coordinate_count();
        let width = kind.columns().len();
        let mut values = Vec::with_capacity(expected_rows * (width - n_coords));
        let mut coords = vec![0.0; n_coords];
        let mut rows = 0;
        for record in csv.records() {
            let record = record?;
            // Line 1 is the META line, which the CSV reader never saw.
            let line = record.position().map_or(0, |p| p.line() + 1);
            let bad = |message: String| FieldFileError::Row { line, message };
            if record.len() != width {
                return Err(bad(format!(
                    "expected {width} columns, found {}",
                    record.len()
                )));
            }
            if rows == expected_rows {
                return Err(bad(format!(
                    "more than the {expected_rows} rows the grids call for"
                )));
            }
            fill_coordinates(&shape, rows, &mut coords);
            for (c, text) in record.iter().enumerate() {
                let v: f64 = text.trim().parse().map_err(|_| {
                    bad(format!(
                        "column `{}`: cannot parse {text:?}",
                        kind.columns()[c]
                    ))
                })?;
                if c < n_coords {
                    let step = shape[c].step();
                    if (v - coords[c]).abs() > 1e-9 * step {
                        return Err(bad(format!(
                            "column `{}` is {v}, but the grid puts {} here",
                            kind.columns()[c],
                            coords[c]
                        )));
                    }
                } else {
                    values.push(v);
                }
            }
            rows += 1;
        }
        if rows != expected_rows {
            return Err(FieldFileError::RowCount {
                expected: expected_rows,
                found: rows,
            });
        }

        let reals = values;
        let complex = || -> Vec<Complex64> {
            reals
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect()
        };
        let diagnostics = meta.diagnostics.clone();
        let data = match kind {
            FieldKind::Wigner => {
                let mut f = WignerField::new(grids[0], grids[1], reals)?;
                f.diagnostics = diagnostics;
                FieldData::Wigner(f)
            }
            FieldKind::MarginalSlice => {
                let params = meta.params.ok_or(FieldFileError::MissingEntry("params"))?;
                FieldData::MarginalSlice(MarginalSlice {
                    params,
                    x_grid: grids[0],
                    values: reals,
                    diagnostics,
                })
            }
            FieldKind::MarginalField => {
                let nx = grids[2].len;
                let w: Vec<f64> = reals.iter().step_by(2).copied().collect();
                let valid = reals
                    .chunks_exact(2 * nx)
                    .map(|cell| cell[1] != 0.0)
                    .collect();
                let mut f = MarginalField::from_values(grids[0], grids[1], grids[2], w)?;
                f.valid = valid;
                f.diagnostics = diagnostics;
                FieldData::MarginalField(f)
            }
            FieldKind::DensityMatrix => FieldData::DensityMatrix(DensityMatrixGrid {
                q_grid: grids[0],
                values: complex(),
                config: meta
                    .reconstruction
                    .ok_or(FieldFileError::MissingEntry("reconstruction"))?,
                diagnostics,
            }),
            FieldKind::Characteristic => FieldData::Characteristic(CharacteristicGrid {
                a_grid: grids[0],
                b_grid: grids[1],
                values: complex(),
                diagnostics,
            }),
        };
        Ok(Self {
            data,
            provenance: meta.provenance,
        })
    }
}

/// Shortest decimal that parses back to the same `f64`, in exponent form
/// for very small and very large magnitudes.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// Coordinates of row `r` of a row-major grid product.
fn fill_coordinates(shape: &[UniformGrid], mut r: usize, out: &mut [f64]) {
    for (k, g) in shape.iter().enumerate().rev() {
        out[k] = g.point(r % g.len);
        r /= g.len;
    }
}
