//! Optional `--config FILE` JSON: grid defaults, quadrature and tolerances.
//! Every key is optional; missing keys keep the library defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use symtomo::state::default_phase_grid;
use symtomo::tomography::{
    default_chi_grid, default_q_grid, default_unit_grid, default_x_grid, LineQuadrature,
    ReconstructionConfig,
};
use symtomo::verify::Tolerances;
use symtomo::UniformGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// q and p grid of Wigner outputs.
    pub phase_grid: UniformGrid,
    /// X grid of marginal slices.
    pub x_grid: UniformGrid,
    /// mu and nu grid of sampled marginal fields.
    pub field_direction_grid: UniformGrid,
    /// X grid of sampled marginal fields.
    pub field_x_grid: UniformGrid,
    /// Characteristic-function grid used by `invert`.
    pub chi_grid: UniformGrid,
    /// Unit-direction slice grid used by `invert`.
    pub unit_grid: UniformGrid,
    /// Position grid of density matrices.
    pub q_grid: UniformGrid,
    pub line: LineQuadrature,
    pub reconstruction: ReconstructionConfig,
    pub tolerances: Tolerances,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            phase_grid: default_phase_grid(),
            x_grid: default_x_grid(),
            field_direction_grid: UniformGrid {
                start: -1.0,
                end: 1.0,
                len: 33,
            },
            field_x_grid: UniformGrid {
                start: -7.0,
                end: 7.0,
                len: 129,
            },
            chi_grid: default_chi_grid(),
            unit_grid: default_unit_grid(),
            q_grid: default_q_grid(),
            line: LineQuadrature::default(),
            reconstruction: ReconstructionConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let config: Config =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        config
            .validate()
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(config)
    }

    fn validate(&self) -> symtomo::Result<()> {
        for g in [
            self.phase_grid,
            self.x_grid,
            self.field_direction_grid,
            self.field_x_grid,
            self.chi_grid,
            self.unit_grid,
            self.q_grid,
        ] {
            UniformGrid::new(g.start, g.end, g.len)?;
        }
        if !(self.line.half_length > 0.0 && self.line.step > 0.0) {
            return Err(symtomo::Error::Config(
                "line quadrature needs positive length and step".into(),
            ));
        }
        self.reconstruction.validate()
    }
}
