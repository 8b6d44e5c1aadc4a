//! CSV tables. Floats are written with 17 significant digits.

use lyastep_core::lyapunov::CertificationReport;
use lyastep_core::ode::HybridTrajectory;

use crate::error::CliResult;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(w.into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?)
    }
}

/// `tau,h,x_0,...,x_{n-1}`, one row per node. `h` is the step leaving the
/// node, 0 on the last row.
pub fn trajectory_table(traj: &HybridTrajectory) -> CsvTable {
    let n = traj.states()[0].len();
    let mut t = CsvTable::new(
        ["tau".to_string(), "h".to_string()]
            .into_iter()
            .chain((0..n).map(|i| format!("x_{i}"))),
    );
    for (i, (tau, x)) in traj.taus().iter().zip(traj.states()).enumerate() {
        let h = traj.steps().get(i).map_or(0.0, |s| s.h);
        let mut row = vec![num(*tau), num(h)];
        row.extend(x.iter().map(|v| num(*v)));
        t.push(row);
    }
    t
}

/// `k,tau,h` with `tau` the node the step starts from.
pub fn steps_table(traj: &HybridTrajectory) -> CsvTable {
    let mut t = CsvTable::new(["k", "tau", "h"]);
    for (k, s) in traj.steps().iter().enumerate() {
        t.push(vec![k.to_string(), num(traj.taus()[k]), num(s.h)]);
    }
    t
}

/// `i,tau,V,threshold,accepted,halvings`.
pub fn certification_table(report: &CertificationReport) -> CsvTable {
    let mut t = CsvTable::new(["i", "tau", "V", "threshold", "accepted", "halvings"]);
    for r in &report.rows {
        t.push(vec![
            r.i.to_string(),
            num(r.tau),
            num(r.v),
            num(r.threshold),
            r.accepted.to_string(),
            r.halvings.to_string(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use lyastep_core::ode::Step;
    use lyastep_core::State;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn trajectory_rows() {
        let mut traj = HybridTrajectory::start(State::from_vec(vec![1.0, 2.0]));
        traj.push(Step {
            h: 0.5,
            increment: State::from_vec(vec![-2.0, 0.0]),
            certificate: None,
            certified_bound: true,
        });
        let t = trajectory_table(&traj);
        assert_eq!(t.header(), ["tau", "h", "x_0", "x_1"]);
        assert_eq!(t.rows().len(), 2);
        assert_eq!(t.rows()[1][1], num(0.0));
        assert_eq!(t.rows()[1][2], num(0.0));
        let text = String::from_utf8(steps_table(&traj).to_bytes().unwrap()).unwrap();
        assert_eq!(text, format!("k,tau,h\n0,{},{}\n", num(0.0), num(0.5)));
    }
}
