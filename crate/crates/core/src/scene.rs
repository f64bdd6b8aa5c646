//! Monostatic radar scene over a single perfectly reflecting wall.
//!
//! The wall lies on the x-axis; the antenna and all targets sit in the upper
//! half-plane. Lengths are in millimetres and the propagation speed in mm/s.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in mm/s.
pub const SPEED_OF_LIGHT_MM_S: f64 = 2.9979e11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Mirror image of `p` across the wall (the x-axis).
pub fn mirror(p: Point2) -> Point2 {
    Point2::new(p.x, -p.y)
}

/// A scatterer. `radius == 0` is an ideal point target; a positive radius is
/// rendered by the forward model as a ring of point scatterers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub center: Point2,
    #[serde(default)]
    pub radius: f64,
    #[serde(default = "unit_contrast")]
    pub contrast: f64,
}

fn unit_contrast() -> f64 {
    1.0
}

impl Target {
    pub fn point(center: Point2) -> Self {
        Target { center, radius: 0.0, contrast: 1.0 }
    }

    pub fn cylinder(center: Point2, radius: f64) -> Self {
        Target { center, radius, contrast: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Shared transmit/receive position.
    pub antenna: Point2,
    /// Wall reflection coefficient applied to every bounce.
    pub reflection_coeff: Complex64,
    pub targets: Vec<Target>,
    /// Propagation speed in mm/s.
    pub speed: f64,
}

impl Default for Scene {
    fn default() -> Self {
        Scene::paper_default()
    }
}

impl Scene {
    /// Antenna at (0, 600) mm, one point target at (600, 750) mm, PEC wall.
    pub fn paper_default() -> Self {
        Scene {
            antenna: Point2::new(0.0, 600.0),
            reflection_coeff: Complex64::new(-1.0, 0.0),
            targets: vec![Target::point(Point2::new(600.0, 750.0))],
            speed: SPEED_OF_LIGHT_MM_S,
        }
    }

    pub fn with_targets(&self, targets: Vec<Target>) -> Self {
        Scene { targets, ..self.clone() }
    }

    /// Checks every scene and target invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), SceneError> {
        if !self.antenna.is_finite() {
            return Err(SceneError::NonFinite { field: "antenna".into() });
        }
        if self.antenna.y <= 0.0 {
            return Err(SceneError::AntennaBelowWall { y: self.antenna.y });
        }
        if !(self.reflection_coeff.re.is_finite() && self.reflection_coeff.im.is_finite()) {
            return Err(SceneError::NonFinite { field: "reflection_coeff".into() });
        }
        if self.reflection_coeff.norm() > 1.0 + 1e-12 {
            return Err(SceneError::ReflectionTooLarge { magnitude: self.reflection_coeff.norm() });
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(SceneError::InvalidSpeed { speed: self.speed });
        }
        for (index, t) in self.targets.iter().enumerate() {
            if !t.center.is_finite() || !t.radius.is_finite() || !t.contrast.is_finite() {
                return Err(SceneError::NonFinite { field: format!("targets[{index}]") });
            }
            if t.radius < 0.0 {
                return Err(SceneError::NegativeRadius { index, radius: t.radius });
            }
            if t.center.y - t.radius <= 0.0 {
                return Err(SceneError::TargetIntersectsWall {
                    index,
                    center_y: t.center.y,
                    radius: t.radius,
                });
            }
        }
        Ok(())
    }

    /// Distances from `p` to the antenna and to the antenna's mirror image.
    ///
    /// Either component is zero when `p` coincides with that endpoint.
    pub fn path_lengths(&self, p: Point2) -> (f64, f64) {
        (self.antenna.distance(p), mirror(self.antenna).distance(p))
    }
}

/// Free-function form of [`Scene::validate`].
pub fn validate_scene(scene: &Scene) -> Result<(), SceneError> {
    scene.validate()
}

pub fn path_lengths(scene: &Scene, p: Point2) -> (f64, f64) {
    scene.path_lengths(p)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("antenna must lie above the wall (antenna.y = {y} mm)")]
    AntennaBelowWall { y: f64 },
    #[error("targets[{index}] intersects the wall (center.y = {center_y} mm, radius = {radius} mm)")]
    TargetIntersectsWall { index: usize, center_y: f64, radius: f64 },
    #[error("targets[{index}] has negative radius {radius} mm")]
    NegativeRadius { index: usize, radius: f64 },
    #[error("|reflection_coeff| = {magnitude} exceeds 1")]
    ReflectionTooLarge { magnitude: f64 },
    #[error("propagation speed must be positive and finite, got {speed}")]
    InvalidSpeed { speed: f64 },
    #[error("{field} is not finite")]
    NonFinite { field: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mirror_examples() {
        assert_eq!(mirror(Point2::new(0.0, 600.0)), Point2::new(0.0, -600.0));
        assert_eq!(mirror(Point2::new(5.0, 0.0)), Point2::new(5.0, 0.0));
        assert_eq!(mirror(Point2::new(600.0, 750.0)), Point2::new(600.0, -750.0));
    }

    #[test]
    fn default_scene_is_valid() {
        assert_eq!(Scene::paper_default().validate(), Ok(()));
    }

    #[test]
    fn antenna_below_wall_rejected() {
        let mut s = Scene::paper_default();
        s.antenna = Point2::new(0.0, -1.0);
        assert!(matches!(s.validate(), Err(SceneError::AntennaBelowWall { .. })));
    }

    #[test]
    fn target_touching_wall_rejected() {
        let s = Scene::paper_default()
            .with_targets(vec![Target::cylinder(Point2::new(600.0, 10.0), 20.0)]);
        assert!(matches!(
            s.validate(),
            Err(SceneError::TargetIntersectsWall { index: 0, .. })
        ));
    }

    #[test]
    fn other_violations() {
        let mut s = Scene::paper_default();
        s.reflection_coeff = Complex64::new(0.0, 1.5);
        assert!(matches!(s.validate(), Err(SceneError::ReflectionTooLarge { .. })));
        let s = Scene::paper_default()
            .with_targets(vec![Target::cylinder(Point2::new(600.0, 750.0), -1.0)]);
        assert!(matches!(s.validate(), Err(SceneError::NegativeRadius { .. })));
        let mut s = Scene::paper_default();
        s.speed = 0.0;
        assert!(matches!(s.validate(), Err(SceneError::InvalidSpeed { .. })));
    }

    #[test]
    fn default_path_lengths() {
        let s = Scene::paper_default();
        let (d, m) = s.path_lengths(Point2::new(600.0, 750.0));
        assert_relative_eq!(d, (600f64 * 600.0 + 150.0 * 150.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(d, 618.466, epsilon = 1e-3);
        assert_relative_eq!(m, 1477.329, epsilon = 1e-3);
        assert_eq!(s.path_lengths(s.antenna).0, 0.0);
    }

    proptest! {
        #[test]
        fn mirror_is_involution(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let p = Point2::new(x, y);
            prop_assert_eq!(mirror(mirror(p)), p);
        }

        #[test]
        fn mirror_path_never_shorter(ax in -2e3f64..2e3, ay in 1.0f64..2e3,
                                     px in -2e3f64..2e3, py in 1.0f64..2e3) {
            let mut s = Scene::paper_default();
            s.antenna = Point2::new(ax, ay);
            let (d, m) = s.path_lengths(Point2::new(px, py));
            prop_assert!(m >= d);
        }

        #[test]
        fn path_lengths_translate_along_wall(shift in -1e3f64..1e3, px in 0f64..1200.0, py in 1f64..1500.0) {
            let s = Scene::paper_default();
            let mut t = s.clone();
            t.antenna.x += shift;
            let p = Point2::new(px, py);
            let (d0, m0) = s.path_lengths(p);
            let (d1, m1) = t.path_lengths(Point2::new(px + shift, py));
            prop_assert!((d0 - d1).abs() <= 1e-9 * d0.max(1.0));
            prop_assert!((m0 - m1).abs() <= 1e-9 * m0.max(1.0));
        }
    }
}
