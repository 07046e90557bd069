use super::spectrum::Spectrum;
use crate::error::{DoaError, Result};

/// DOA estimates ordered by descending peak height.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub doas_deg: Vec<f64>,
    pub peak_values: Vec<f64>,
    pub num_sources_assumed: usize,
    /// Fewer than `num_sources_assumed` separated local maxima were found.
    pub incomplete: bool,
}

/// Interior local maxima: strictly above the left neighbour and above the
/// first differing value on the right. A plateau reports its leftmost index.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let len = values.len();
    let mut i = 1;
    while i + 1 < len {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < len && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < len && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Picks up to `n` local maxima pairwise separated by at least `guard_deg`,
/// tallest first (lower angle first on ties), each refined by a parabola
/// through the log-spectrum at the peak and its two neighbours.
pub fn find_peaks(spectrum: &Spectrum, n: usize, guard_deg: f64) -> Result<EstimationResult> {
    if n == 0 {
        return Err(DoaError::Contract("peak count must be at least 1".into()));
    }
    if !(guard_deg >= 0.0) {
        return Err(DoaError::Contract(format!("guard must be non-negative, got {guard_deg}")));
    }
    let values = &spectrum.values;
    let grid = &spectrum.grid_deg;
    let mut candidates = local_maxima(values);
    candidates.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for idx in candidates {
        if chosen.len() == n {
            break;
        }
        if chosen.iter().all(|&c| (grid[c] - grid[idx]).abs() >= guard_deg) {
            chosen.push(idx);
        }
    }

    Ok(EstimationResult {
        doas_deg: chosen.iter().map(|&i| refine(grid, values, i)).collect(),
        peak_values: chosen.iter().map(|&i| values[i]).collect(),
        num_sources_assumed: n,
        incomplete: chosen.len() < n,
    })
}

fn refine(grid: &[f64], values: &[f64], i: usize) -> f64 {
    let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
    if l <= 0.0 || r <= 0.0 || c < l || c < r {
        return grid[i];
    }
    let (yl, yc, yr) = (l.ln(), c.ln(), r.ln());
    let (dl, dr) = (grid[i - 1] - grid[i], grid[i + 1] - grid[i]);
    // y − yc = b·u + a·u² through (dl, yl−yc) and (dr, yr−yc)
    let (pl, pr) = (yl - yc, yr - yc);
    let det = dl * dr * (dr - dl);
    let a = (pr * dl - pl * dr) / det;
    let b = (pl * dr * dr - pr * dl * dl) / det;
    if !(a < 0.0) {
        return grid[i];
    }
    let offset = (-b / (2.0 * a)).clamp(dl / 2.0, dr / 2.0);
    grid[i] + offset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::SpectrumKind;

    fn spectrum(grid: Vec<f64>, values: Vec<f64>) -> Spectrum {
        Spectrum::new(grid, values, SpectrumKind::MusicPseudo).unwrap()
    }

    #[test]
    fn triangle_apex() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&x| 10.0 - (x - 4.0).abs()).collect();
        let est = find_peaks(&spectrum(grid, values), 1, 1.0).unwrap();
        assert!((est.doas_deg[0] - 4.0).abs() < 1e-12);
        assert_eq!(est.peak_values, vec![10.0]);
        assert!(!est.incomplete);
    }

    #[test]
    fn equal_peaks_lower_angle_first() {
        let grid: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&x| if x == 5.0 || x == 20.0 { 3.0 } else { 1.0 })
            .collect();
        let est = find_peaks(&spectrum(grid, values), 2, 2.0).unwrap();
        assert_eq!(est.doas_deg, vec![5.0, 20.0]);
    }

    #[test]
    fn gaussian_refinement() {
        let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = grid.iter().map(|&x| (-(x - 20.05f64).powi(2)).exp()).collect();
        let est = find_peaks(&spectrum(grid, values), 1, 0.0).unwrap();
        assert!((est.doas_deg[0] - 20.05).abs() <= 0.01, "{}", est.doas_deg[0]);
    }

    #[test]
    fn guard_and_shortfall() {
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let values = vec![0.0, 5.0, 0.0, 4.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let est = find_peaks(&spectrum(grid, values), 3, 2.5).unwrap();
        assert_eq!(est.doas_deg.len(), 1);
        assert!(est.incomplete);
        assert!(find_peaks(&spectrum(vec![0.0, 1.0], vec![1.0, 1.0]), 0, 1.0).is_err());
    }

    #[test]
    fn plateau_reports_leftmost() {
        assert_eq!(local_maxima(&[0.0, 2.0, 2.0, 2.0, 1.0]), vec![1]);
        assert!(local_maxima(&[0.0, 2.0, 2.0, 3.0]).is_empty());
        assert!(local_maxima(&[3.0, 2.0, 1.0]).is_empty());
    }
}
