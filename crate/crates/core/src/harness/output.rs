//! CSV and JSON writers. Every file opens with `# key = value` header lines.

use std::io::{self, Write};

use crate::analysis::{region_boundary, RateRegion2};

use super::config::ExperimentConfig;
use super::sweep::{GridPoint, OraclePoint};

pub fn write_header(out: &mut dyn Write, lines: &str) -> io::Result<()> {
    out.write_all(lines.as_bytes())
}

/// `lambda0,lambda1,mean_q_avg,stable_fraction`; multi-relay points add the
/// remaining rates as `lambda2..`. Failed points carry `NaN` and an error column.
pub fn write_sweep_csv(out: &mut dyn Write, config: &ExperimentConfig, points: &[GridPoint]) -> io::Result<()> {
    write_header(out, &config.header())?;
    let n = config.params.n_nodes();
    let names: Vec<String> = (0..n).map(|i| format!("lambda{i}")).collect();
    writeln!(out, "{},mean_q_avg,q_avg_half_width,stable_fraction,error", names.join(","))?;
    for p in points {
        let rates: Vec<String> = p.lambda.iter().map(|l| format!("{l:.6}")).collect();
        match &p.result {
            Ok(s) => writeln!(
                out,
                "{},{:.6},{:.6},{:.6},",
                rates.join(","),
                s.mean_q_avg,
                s.q_avg_half_width,
                s.stable_fraction
            )?,
            Err(e) => writeln!(out, "{},NaN,NaN,NaN,\"{e}\"", rates.join(","))?,
        }
    }
    Ok(())
}

/// `angle_deg,lambda0,lambda1` for `samples` rays over the quarter plane.
pub fn write_region_csv(out: &mut dyn Write, region: &RateRegion2, samples: usize) -> io::Result<()> {
    writeln!(out, "# rho0 = {}", region.rho0)?;
    writeln!(out, "# rho1 = {}", region.rho1)?;
    writeln!(out, "angle_deg,lambda0,lambda1")?;
    let n = samples.max(2);
    for k in 0..n {
        let deg = 90.0 * k as f64 / (n - 1) as f64;
        let (l0, l1) = region_boundary(region, deg.to_radians());
        writeln!(out, "{deg:.6},{l0:.6},{l1:.6}")?;
    }
    Ok(())
}

/// Empirical boundary points next to the analytic ones.
pub fn write_oracle_csv(out: &mut dyn Write, config: &ExperimentConfig, points: &[OraclePoint]) -> io::Result<()> {
    write_header(out, &config.header())?;
    writeln!(out, "angle_deg,lambda0,lambda1,analytic_lambda0,analytic_lambda1,distance,horizon,noisy")?;
    let region = RateRegion2 {
        rho0: config.params.rho[0],
        rho1: config.params.rho[1],
    };
    for p in points {
        let (a0, a1) = region_boundary(&region, p.angle_deg.to_radians());
        let d = ((p.lambda0 - a0).powi(2) + (p.lambda1 - a1).powi(2)).sqrt();
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{a0:.6},{a1:.6},{d:.6},{},{}",
            p.angle_deg, p.lambda0, p.lambda1, p.horizon, p.noisy
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_csv_shape() {
        let mut buf = Vec::new();
        write_region_csv(&mut buf, &RateRegion2 { rho0: 0.4, rho1: 0.7 }, 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[2], "angle_deg,lambda0,lambda1");
        assert_eq!(lines.len(), 6);
        assert!(lines[3].starts_with("0.000000,0.7"));
    }
}
