//! Trajectory CSV: `t,x1..xn,eps,gnorm,beta,phi,clearance`.

use std::fmt::Write as _;
use std::path::Path;

use crate::descent::Trajectory;
use crate::error::{NavError, Result};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders a trajectory as CSV text; `eps` and `gnorm` are empty on the final row.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.iterates.first().map_or(0, |x| x.len());
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    out.push_str(",eps,gnorm,beta,phi,clearance\n");
    for (x, r) in traj.iterates.iter().zip(&traj.records) {
        let _ = write!(out, "{}", r.t);
        for v in x.iter() {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{},{},{},{},{}", opt(r.eps), opt(r.gnorm), r.beta, r.phi, r.clearance);
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

/// Reads back the iterate coordinates of a trajectory CSV.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| NavError::Config { field: "csv".into(), message: "empty file".into() })?;
    let n = header.split(',').filter(|h| h.starts_with('x')).count();
    let mut points = Vec::new();
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let coords: std::result::Result<Vec<f64>, _> = cells.iter().skip(1).take(n).map(|c| c.parse::<f64>()).collect();
        points.push(coords.map_err(|e| NavError::Config { field: format!("csv row {}", row + 2), message: e.to_string() })?);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::{RunStatus, StepRecord};
    use nalgebra::dvector;

    #[test]
    fn header_and_rows() {
        let traj = Trajectory {
            iterates: vec![dvector![1.0, 2.0], dvector![0.5, 2.0]],
            records: vec![
                StepRecord { t: 0, eps: Some(0.5), gnorm: Some(1.0), beta: 3.0, phi: 0.25, clearance: 1.5, awareness: 1 },
                StepRecord { t: 1, eps: None, gnorm: None, beta: 2.0, phi: 0.2, clearance: 1.0, awareness: 1 },
            ],
            estimates: vec![dvector![1.0, 0.0]],
            status: RunStatus::MaxSteps,
            clipped_steps: 0,
        };
        let text = trajectory_csv(&traj);
        assert_eq!(text, "t,x1,x2,eps,gnorm,beta,phi,clearance\n0,1,2,0.5,1,3,0.25,1.5\n1,0.5,2,,,2,0.2,1\n");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trajectory_csv(&traj, &p).unwrap();
        assert_eq!(read_trajectory_csv(&p).unwrap(), vec![vec![1.0, 2.0], vec![0.5, 2.0]]);
    }
}
