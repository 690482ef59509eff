//! Ground-truth convex geometry: workspace shell, obstacles and objective.

pub mod file;
pub mod obstacle;
pub mod validate;
pub mod world;

pub use file::{load_world, save_world, ObstacleSpec, WorldSpec};
pub use obstacle::{EggAxis, EggObstacle, EllipseObstacle, Obstacle, Projection, SphereObstacle};
pub use validate::{validate_world, ValidationIssue, ValidationReport};
pub use world::{product_rule, QuadraticObjective, WorkspaceSphere, World};
