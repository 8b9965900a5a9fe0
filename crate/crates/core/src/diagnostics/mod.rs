//! Norms and inequality checkers evaluated on grid fields and trajectories.

mod gn;
mod lp;
mod maximal;
mod residual;
mod strichartz;
mod vp;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub use gn::{
    gn_ratio, gn_ratio_linear, gn_ratio_spacetime, gn_ratio_spacetime_linear, hat_field,
    pointwise_sup_ratio, r1_of, scattering_field, strichartz_partner,
};
pub use lp::{besov_norm, lp_decompose, lp_profile, LpDecomposition};
pub use maximal::maximal_function;
pub use residual::pde_residual;
pub use strichartz::{strichartz_fields, strichartz_norm, StrichartzReport};
pub use vp::{v_p_discrete, v_p_dp, v_p_trajectory};

/// One evaluated norm or ratio with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub name: String,
    pub value: f64,
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub q: Option<f64>,
    /// `"{n}x{n}@{L}"` of the grid the norm was computed on.
    pub grid: String,
    /// Save-time spacing for mixed space-time norms.
    pub cadence: Option<f64>,
    /// Parameter of the scaling family the input belongs to, if any.
    pub scale: Option<f64>,
}

impl NormReport {
    pub fn new(name: impl Into<String>, value: f64, grid: &GridSpec) -> Self {
        Self {
            name: name.into(),
            value,
            s: None,
            p: None,
            r: None,
            q: None,
            grid: grid_label(grid),
            cadence: None,
            scale: None,
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_cadence(mut self, dt: f64) -> Self {
        self.cadence = Some(dt);
        self
    }

    pub fn with_scale(mut self, lambda: f64) -> Self {
        self.scale = Some(lambda);
        self
    }

    /// Fails unless the value is finite and nonnegative.
    pub fn check(self) -> Result<Self> {
        if self.value.is_finite() && self.value >= 0.0 {
            Ok(self)
        } else {
            Err(Error::Contract {
                what: format!("norm {} is not finite and nonnegative", self.name),
                magnitude: self.value,
            })
        }
    }
}

pub(crate) fn grid_label(g: &GridSpec) -> String {
    format!("{}x{}@{}", g.n(), g.n(), g.half_width())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    run_id: &'a str,
    name: &'a str,
    s: Option<f64>,
    p: Option<f64>,
    r: Option<f64>,
    q: Option<f64>,
    value: f64,
    grid: &'a str,
    cadence: Option<f64>,
}

/// Writes reports as CSV with columns
/// `run_id, name, s, p, r, q, value, grid, cadence`.
pub fn write_csv<W: Write>(w: W, run_id: &str, reports: &[NormReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for rep in reports {
        out.serialize(CsvRow {
            run_id,
            name: &rep.name,
            s: rep.s,
            p: rep.p,
            r: rep.r,
            q: rep.q,
            value: rep.value,
            grid: &rep.grid,
            cadence: rep.cadence,
        })
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_schema() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let reps = vec![
            NormReport::new("besov", 1.5, &g)
                .with_s(0.5)
                .with_p(2.0)
                .with_q(2.0),
            NormReport::new("strichartz", 0.25, &g)
                .with_p(4.0)
                .with_r(4.0)
                .with_cadence(0.01),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, "run1", &reps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "run_id,name,s,p,r,q,value,grid,cadence"
        );
        assert_eq!(
            lines.next().unwrap(),
            "run1,besov,0.5,2.0,,2.0,1.5,16x16@4,"
        );
        assert_eq!(
            lines.next().unwrap(),
            "run1,strichartz,,4.0,4.0,,0.25,16x16@4,0.01"
        );
    }

    #[test]
    fn check_rejects_nan() {
        let g = GridSpec::new(16, 4.0).unwrap();
        assert!(NormReport::new("x", f64::NAN, &g).check().is_err());
        assert!(NormReport::new("x", -1.0, &g).check().is_err());
        assert!(NormReport::new("x", 0.0, &g).check().is_ok());
    }
}
