//! JSON world description in closed functional form.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::obstacle::{EggAxis, EggObstacle, EllipseObstacle, Obstacle, SphereObstacle};
use crate::geometry::world::{QuadraticObjective, WorkspaceSphere, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleSpec {
    Sphere { center: Vec<f64>, radius: f64 },
    Ellipse { center: Vec<f64>, matrix: Vec<Vec<f64>>, scale: f64 },
    Egg { center: Vec<f64>, tip_distance: f64, axis: EggAxis },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub xstar: Vec<f64>,
    /// Rows of `Q`.
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub fmin: f64,
}

/// Serializable form of a [`World`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub workspace: WorkspaceSpec,
    pub obstacles: Vec<ObstacleSpec>,
    pub objective: ObjectiveSpec,
}

fn config_err(field: impl Into<String>, e: NavError) -> NavError {
    NavError::Config { field: field.into(), message: e.to_string() }
}

fn matrix_from_rows(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(NavError::Config { field: field.into(), message: "matrix must be square and non-empty".into() });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl WorldSpec {
    pub fn build(&self) -> Result<World> {
        let workspace = WorkspaceSphere::new(DVector::from_vec(self.workspace.center.clone()), self.workspace.radius)
            .map_err(|e| config_err("workspace", e))?;
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (i, o) in self.obstacles.iter().enumerate() {
            let field = format!("obstacles[{i}]");
            let built = match o {
                ObstacleSpec::Sphere { center, radius } => {
                    SphereObstacle::new(DVector::from_vec(center.clone()), *radius).map(Obstacle::Sphere)
                }
                ObstacleSpec::Ellipse { center, matrix, scale } => {
                    let a = matrix_from_rows(matrix, &format!("{field}.matrix"))?;
                    EllipseObstacle::new(DVector::from_vec(center.clone()), a, *scale).map(Obstacle::Ellipse)
                }
                ObstacleSpec::Egg { center, tip_distance, axis } => {
                    EggObstacle::new(DVector::from_vec(center.clone()), *tip_distance, *axis).map(Obstacle::Egg)
                }
            };
            obstacles.push(built.map_err(|e| config_err(field, e))?);
        }
        let q = matrix_from_rows(&self.objective.q, "objective.Q")?;
        let objective = QuadraticObjective::new(DVector::from_vec(self.objective.xstar.clone()), q, self.objective.fmin)
            .map_err(|e| config_err("objective", e))?;
        World::new(workspace, obstacles, objective).map_err(|e| config_err("world", e))
    }

    pub fn from_world(world: &World) -> Self {
        let obstacles = world
            .obstacles
            .iter()
            .map(|o| match o {
                Obstacle::Sphere(s) => ObstacleSpec::Sphere { center: s.center.iter().copied().collect(), radius: s.radius },
                Obstacle::Ellipse(e) => ObstacleSpec::Ellipse {
                    center: e.center.iter().copied().collect(),
                    matrix: rows_from_matrix(&e.matrix),
                    scale: e.scale,
                },
                Obstacle::Egg(g) => ObstacleSpec::Egg {
                    center: g.center.iter().copied().collect(),
                    tip_distance: g.tip_distance,
                    axis: g.axis,
                },
            })
            .collect();
        WorldSpec {
            workspace: WorkspaceSpec {
                center: world.workspace.center.iter().copied().collect(),
                radius: world.workspace.radius,
            },
            obstacles,
            objective: ObjectiveSpec {
                xstar: world.objective.xstar.iter().copied().collect(),
                q: rows_from_matrix(&world.objective.q),
                fmin: world.objective.fmin,
            },
        }
    }
}

/// Reads and builds a world file.
pub fn load_world(path: &Path) -> Result<World> {
    let text = std::fs::read_to_string(path)?;
    let spec: WorldSpec = serde_json::from_str(&text)?;
    spec.build()
}

/// Writes a world file as pretty JSON.
pub fn save_world(world: &World, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&WorldSpec::from_world(world))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "workspace": {"center": [0, 0], "radius": 20},
        "obstacles": [
            {"kind": "sphere", "center": [5, 0], "radius": 1},
            {"kind": "ellipse", "center": [-6, 6], "matrix": [[2, 0.5], [0.5, 1]], "scale": 2},
            {"kind": "egg", "center": [0, -8], "tip_distance": 1.5, "axis": "vertical"}
        ],
        "objective": {"xstar": [1, 1], "Q": [[1, 0], [0, 2]], "fmin": 0}
    }"#;

    #[test]
    fn round_trip() {
        let spec: WorldSpec = serde_json::from_str(SAMPLE).unwrap();
        let world = spec.build().unwrap();
        assert_eq!(world.obstacles.len(), 3);
        let again = WorldSpec::from_world(&world);
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let bad = SAMPLE.replace("[[2, 0.5], [0.5, 1]]", "[[2, 0.5], [0.4, 1]]");
        let spec: WorldSpec = serde_json::from_str(&bad).unwrap();
        match spec.build() {
            Err(NavError::Config { field, .. }) => assert_eq!(field, "obstacles[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_kind() {
        let bad = SAMPLE.replace("\"sphere\"", "\"cube\"");
        assert!(serde_json::from_str::<WorldSpec>(&bad).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        let world = serde_json::from_str::<WorldSpec>(SAMPLE).unwrap().build().unwrap();
        save_world(&world, &path).unwrap();
        assert_eq!(load_world(&path).unwrap(), world);
    }
}
