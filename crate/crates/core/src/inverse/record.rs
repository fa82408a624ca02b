use std::io::{self, Write};

/// One iteration of an inversion history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordRow {
    pub iter: usize,
    /// Relative true residual of the solved system.
    pub residual: f64,
    /// `J(g_k)`, when cost tracking is on.
    pub cost: Option<f64>,
    /// `‖g_k - g*‖ / ‖g*‖` on the wall coefficients, when the truth is known.
    pub traction_err: Option<f64>,
    /// `‖A g_k - u*‖ / ‖u*‖` on the surface nodes.
    pub disp_err: Option<f64>,
}

/// Per-iteration history of an inversion, iteration 0 being the zero guess.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub rows: Vec<RecordRow>,
}

impl ConvergenceRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&RecordRow> {
        self.rows.last()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual).collect()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.cost).collect()
    }

    pub fn traction_errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.traction_err).collect()
    }

    /// First iteration whose residual is at or below `level`.
    pub fn iterations_to(&self, level: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.residual <= level).map(|r| r.iter)
    }

    /// Writes `iter,residual,cost,traction_err,disp_err`, leaving absent
    /// values empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        fn opt(v: Option<f64>) -> String {
            v.map_or(String::new(), |x| format!("{x:e}"))
        }
        writeln!(w, "iter,residual,cost,traction_err,disp_err")?;
        for r in &self.rows {
            writeln!(w, "{},{:e},{},{},{}", r.iter, r.residual, opt(r.cost), opt(r.traction_err), opt(r.disp_err))?;
        }
        Ok(())
    }
}
