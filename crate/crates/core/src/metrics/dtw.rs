//! Dynamic time warping over an arbitrary non-negative local cost.

use super::chroma::{frame_cosine, ChromaMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Sum of local costs along the optimal path.
    pub cost: f64,
    /// Monotone path from `(0, 0)` to `(rows - 1, cols - 1)`.
    pub path: Vec<(usize, usize)>,
}

/// Classic DTW with steps (1,1), (1,0), (0,1).
///
/// `band` restricts cells to a Sakoe-Chiba corridor of that half-width
/// around the rescaled diagonal; it is widened to the diagonal slope so the
/// end cell stays reachable. Ties during backtracking prefer the diagonal,
/// then (1,0), then (0,1).
pub fn dtw(rows: usize, cols: usize, local: impl Fn(usize, usize) -> f64, band: Option<usize>) -> Alignment {
    assert!(rows > 0 && cols > 0, "dtw needs non-empty inputs");
    let inside = corridor(rows, cols, band);
    let mut acc = vec![f64::INFINITY; rows * cols];
    let at = |i: usize, j: usize| i * cols + j;
    for i in 0..rows {
        for j in 0..cols {
            if !inside(i, j) {
                continue;
            }
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[at(i - 1, j)] } else { f64::INFINITY };
                let left = if j > 0 { acc[at(i, j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = best + local(i, j);
        }
    }

    let mut path = vec![(rows - 1, cols - 1)];
    let (mut i, mut j) = (rows - 1, cols - 1);
    while (i, j) != (0, 0) {
        let mut step = None;
        let mut best = f64::INFINITY;
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            if i >= di && j >= dj {
                let v = acc[at(i - di, j - dj)];
                if v < best {
                    best = v;
                    step = Some((di, dj));
                }
            }
        }
        let (di, dj) = step.expect("band keeps the start reachable");
        i -= di;
        j -= dj;
        path.push((i, j));
    }
    path.reverse();
    Alignment {
        cost: acc[at(rows - 1, cols - 1)],
        path,
    }
}

fn corridor(rows: usize, cols: usize, band: Option<usize>) -> impl Fn(usize, usize) -> bool {
    let slope = if rows > 1 { (cols - 1) as f64 / (rows - 1) as f64 } else { 0.0 };
    let width = band.map(|w| (w as f64).max(slope.ceil()).max(1.0));
    move |i, j| match width {
        None => true,
        Some(_) if rows == 1 => true,
        Some(w) => (j as f64 - i as f64 * slope).abs() <= w,
    }
}

/// Aligns two chromagrams under cosine distance `1 - a.b`.
pub fn dtw_align(a: &ChromaMatrix, b: &ChromaMatrix) -> Alignment {
    dtw_align_banded(a, b, None)
}

pub fn dtw_align_banded(a: &ChromaMatrix, b: &ChromaMatrix, band: Option<usize>) -> Alignment {
    dtw(
        a.len(),
        b.len(),
        |i, j| (1.0 - frame_cosine(&a.frames[i], &b.frames[j])).max(0.0),
        band,
    )
}
