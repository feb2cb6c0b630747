use std::io::{self, Write};
use std::time::Duration;

/// Column header of the CSV trace export.
pub const TRACE_CSV_HEADER: &str =
    "iter,phi,theta,step_norm,tau1,tau2,descent_margin,subgrad_residual,elapsed_ms";

/// Diagnostics recorded after producing iterate `iter` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub iter: usize,
    /// `Φ(x1^{k+1}, x2^{k+1})`.
    pub phi: f64,
    /// `Θ(w^{k+1})`.
    pub theta: f64,
    /// `‖w^{k+1} − w^k‖`.
    pub step_norm: f64,
    /// `‖w^{k+1} − w^k‖ / (1 + ‖w^k‖)`.
    pub relative_step: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// `Θ(w^k) − Θ(w^{k+1}) − δ‖w^{k+1} − w^k‖²`; nonnegative up to roundoff.
    pub descent_margin: f64,
    pub subgrad_residual: f64,
    /// Gradient Lipschitz moduli of the two kernels used in this step.
    pub kernel_lipschitz: [f64; 2],
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    pub delta: (f64, f64),
    /// `δ = (ε/2)·min{δ1, δ2}`.
    pub descent_modulus: f64,
    /// `Θ(w^0) = Φ(x^0)`.
    pub initial_theta: f64,
    pub records: Vec<IterateRecord>,
    pub converged: bool,
}

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterateRecord> {
        self.records.last()
    }

    /// `Φ` after each iteration.
    pub fn objective_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.phi).collect()
    }

    /// `Σ ‖Δw‖²` over the whole run.
    pub fn squared_step_sum(&self) -> f64 {
        self.records.iter().map(|r| r.step_norm * r.step_norm).sum()
    }

    /// First 1-based iteration whose objective is within
    /// `threshold·|reference|` of `reference`.
    pub fn iterations_to_reach(&self, reference: f64, threshold: f64) -> Option<usize> {
        let target = reference + threshold * reference.abs();
        self.records.iter().find(|r| r.phi <= target).map(|r| r.iter)
    }

    /// Writes the trace as CSV. `comment` lines are emitted first, each
    /// prefixed with `# `. With `timing == false` the elapsed column is
    /// written as `0` so that repeated runs produce identical files.
    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>, timing: bool) -> io::Result<()> {
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for r in &self.records {
            let ms = if timing { r.elapsed.as_secs_f64() * 1e3 } else { 0.0 };
            writeln!(
                out,
                "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.3}",
                r.iter,
                r.phi,
                r.theta,
                r.step_norm,
                r.tau1,
                r.tau2,
                r.descent_margin,
                r.subgrad_residual,
                ms
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iter: usize, phi: f64) -> IterateRecord {
        IterateRecord {
            iter,
            phi,
            theta: phi,
            step_norm: 0.5,
            relative_step: 0.1,
            tau1: 1.0,
            tau2: 2.0,
            descent_margin: 0.0,
            subgrad_residual: 0.0,
            kernel_lipschitz: [1.0, 1.0],
            elapsed: Duration::from_millis(3),
        }
    }

    #[test]
    fn csv_layout() {
        let trace = IterateTrace {
            delta: (1.0, 1.0),
            descent_modulus: 0.05,
            initial_theta: 10.0,
            records: vec![record(1, 3.0), record(2, 2.5)],
            converged: false,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, Some("cfg a\ncfg b"), false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# cfg a");
        assert_eq!(lines[1], "# cfg b");
        assert_eq!(lines[2], TRACE_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        let fields: Vec<_> = lines[3].split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], "1");
        assert_eq!(fields[1].parse::<f64>().unwrap(), 3.0);
        assert_eq!(fields[8], "0.000");
        // at least 12 significant digits
        assert!(fields[1].split('e').next().unwrap().len() >= 13);
    }

    #[test]
    fn threshold_search() {
        let trace = IterateTrace {
            delta: (0.0, 0.0),
            descent_modulus: 0.0,
            initial_theta: 10.0,
            records: vec![record(1, 5.0), record(2, 2.05), record(3, 2.0)],
            converged: true,
        };
        assert_eq!(trace.iterations_to_reach(2.0, 0.01), Some(3));
        assert_eq!(trace.iterations_to_reach(2.0, 0.05), Some(2));
        assert!((trace.squared_step_sum() - 0.75).abs() < 1e-15);
    }
}
