use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};

/// Lower clamp on null-spectrum values before inversion.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    MusicPseudo,
    CyclicMusicPseudo,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumWarning {
    /// No gap between the last signal and first noise eigen/singular value,
    /// so the subspace split is arbitrary (e.g. identity covariance).
    DegenerateSubspace { last_signal: f64, first_noise: f64 },
}

/// Pseudo-spectrum over an increasing angle grid; sources appear as maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid_deg: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    pub warnings: Vec<SpectrumWarning>,
}

impl Spectrum {
    pub fn new(grid_deg: Vec<f64>, values: Vec<f64>, kind: SpectrumKind) -> Result<Self> {
        if grid_deg.is_empty() || grid_deg.len() != values.len() {
            return Err(DoaError::Contract(format!(
                "spectrum needs a non-empty grid with one value per angle ({} angles, {} values)",
                grid_deg.len(),
                values.len()
            )));
        }
        if grid_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DoaError::Contract("spectrum grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DoaError::Contract("spectrum values must be finite and non-negative".into()));
        }
        Ok(Self {
            grid_deg,
            values,
            kind,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the grid angle closest to `angle_deg`.
    pub fn nearest_index(&self, angle_deg: f64) -> usize {
        let mut best = 0;
        for (i, &g) in self.grid_deg.iter().enumerate() {
            if (g - angle_deg).abs() < (self.grid_deg[best] - angle_deg).abs() {
                best = i;
            }
        }
        best
    }
}

/// Uniform angle grid `start, start+step, …, stop` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleGrid {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self {
            start_deg: 0.0,
            stop_deg: 180.0,
            step_deg: 0.1,
        }
    }
}

impl AngleGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.start_deg.is_finite()
            && self.stop_deg.is_finite()
            && self.step_deg.is_finite()
            && self.step_deg > 0.0
            && self.start_deg >= 0.0
            && self.stop_deg <= 180.0
            && self.start_deg < self.stop_deg;
        if ok {
            Ok(())
        } else {
            Err(DoaError::Config(format!(
                "angle grid must satisfy 0 <= start < stop <= 180 with step > 0, got {}..{} step {}",
                self.start_deg, self.stop_deg, self.step_deg
            )))
        }
    }

    pub fn len(&self) -> usize {
        ((self.stop_deg - self.start_deg) / self.step_deg + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| (self.start_deg + i as f64 * self.step_deg).min(self.stop_deg))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_1801_points() {
        let g = AngleGrid::default();
        let p = g.points();
        assert_eq!(p.len(), 1801);
        assert_eq!(p[0], 0.0);
        assert!((p[1800] - 180.0).abs() < 1e-12);
        assert!((p[200] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_invariants() {
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0], SpectrumKind::MusicPseudo).is_err());
        assert!(Spectrum::new(vec![1.0, 1.0], vec![1.0, 2.0], SpectrumKind::MusicPseudo).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0, -2.0], SpectrumKind::MusicPseudo).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0, f64::NAN], SpectrumKind::MusicPseudo).is_err());
        let s = Spectrum::new(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 2.0], SpectrumKind::MusicPseudo).unwrap();
        assert_eq!(s.nearest_index(1.4), 1);
        assert_eq!(s.max_value(), 3.0);
    }

    #[test]
    fn bad_grid_rejected() {
        let g = AngleGrid { start_deg: -5.0, stop_deg: 25.0, step_deg: 0.1 };
        assert!(g.validate().is_err());
        let g = AngleGrid { start_deg: 0.0, stop_deg: 25.0, step_deg: 0.0 };
        assert!(g.validate().is_err());
    }
}
