//! CSV rows shared by every experiment.

use std::io::{self, Write};

pub const HEADER: &str = "experiment,n,rho,r,tau2_mode,tau2,p,theta,grid_param,replicate,value,stderr,reps,seed";

/// One CSV line. `replicate = None` marks an aggregate row.
///
/// Formula predictions are aggregate rows with `reps = 0` and `stderr = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: &'static str,
    pub n: usize,
    pub rho: f64,
    pub r: f64,
    pub tau2_mode: &'static str,
    pub tau2: Option<f64>,
    pub p: f64,
    pub theta: Option<f64>,
    pub grid_param: String,
    pub replicate: Option<u64>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub reps: usize,
    pub seed: u64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.n,
            self.rho,
            self.r,
            self.tau2_mode,
            opt(self.tau2),
            self.p,
            opt(self.theta),
            self.grid_param,
            self.replicate.map(|r| r.to_string()).unwrap_or_else(|| "agg".into()),
            self.value,
            opt(self.stderr),
            self.reps,
            self.seed
        )
    }

    pub fn is_agg(&self) -> bool {
        self.replicate.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{HEADER}")?;
        for row in &self.rows {
            writeln!(w, "{}", row.to_csv())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("rows are ASCII")
    }

    /// Aggregate rows with the given label.
    pub fn agg<'a>(&'a self, grid_param: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.is_agg() && r.grid_param == grid_param)
    }
}
