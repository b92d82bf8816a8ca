//! Escape-level rasters of the spectrum and of its monic-side counterpart,
//! with PGM/CSV writers and a connected-component counter for the rendered
//! inside region.
//!
//! Pixels are classified by running the orbit cascade up to a level budget;
//! pixels whose orbit never leaves the escape disk within the budget are
//! reported as inside (level 0). The inside region is therefore always an
//! over-approximation of the true set, shrinking as the budget grows.

use std::fs::File;
use std::io::{BufWriter, Result as IoResult, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::probability::ProbabilitySequence;
use crate::spectrum::{apply_g, iterate_f, OrbitStatus, ESCAPE_TOLERANCE};

/// Which plane the raster samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoordinateSystem {
    /// The spectrum plane: orbits alternate the affine change `h_j` with the
    /// `d`-th power.
    Spectrum,
    /// The plane of the conjugated cascade `g_2, g_3, ...`; the spectrum is
    /// the preimage of this set under `h_1`.
    FilledJulia,
}

/// Axis-aligned view rectangle in plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub center_re: f64,
    pub center_im: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone)]
pub struct RenderConfig {
    pub width_px: u32,
    pub height_px: u32,
    /// Orbit budget per pixel.
    pub max_levels: u32,
    pub coords: CoordinateSystem,
    /// Defaults to a frame comfortably containing the set: the unit-disk
    /// preimage under `h_1` (center `1 - p_1`, side `2.4 p_1`) for the
    /// spectrum, center 0 side 2.4 for the conjugated plane.
    pub window: Option<Window>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width_px: 512,
            height_px: 512,
            max_levels: 256,
            coords: CoordinateSystem::Spectrum,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RasterMeta {
    /// Compact JSON of the probability model the raster was computed from.
    pub probs: String,
    pub coords: CoordinateSystem,
    pub max_levels: u32,
    /// Effective window after letterboxing to the pixel aspect ratio.
    pub window: Window,
    /// Level-0 pixels may still escape past the budget; always true.
    pub inside_is_over_approximation: bool,
}

/// Row-major escape levels, row 0 at the top of the window; 0 means the
/// orbit stayed bounded for the whole budget.
#[derive(Debug, Clone, Serialize)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub levels: Vec<u32>,
    pub meta: RasterMeta,
}

impl Raster {
    pub fn level_at(&self, row: u32, col: u32) -> u32 {
        assert!(row < self.height && col < self.width);
        self.levels[(row as usize) * (self.width as usize) + col as usize]
    }

    pub fn inside_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l == 0).count()
    }
}

fn default_window(probs: &ProbabilitySequence, coords: CoordinateSystem) -> Window {
    match coords {
        CoordinateSystem::Spectrum => {
            let p1 = probs.p(1);
            Window {
                center_re: 1.0 - p1,
                center_im: 0.0,
                width: 2.4 * p1,
                height: 2.4 * p1,
            }
        }
        CoordinateSystem::FilledJulia => Window {
            center_re: 0.0,
            center_im: 0.0,
            width: 2.4,
            height: 2.4,
        },
    }
}

/// Letterboxes the requested window to the pixel grid: one square pixel
/// scale `s = max(w/W, h/H)`, window grown symmetrically to `s W x s H`.
fn effective_window(window: Window, width_px: u32, height_px: u32) -> (Window, f64) {
    let scale = (window.width / width_px as f64).max(window.height / height_px as f64);
    (
        Window {
            center_re: window.center_re,
            center_im: window.center_im,
            width: scale * width_px as f64,
            height: scale * height_px as f64,
        },
        scale,
    )
}

/// Escape level of one conjugated-plane point under `g_2, g_3, ...`
/// (0 when the budget runs out), same escape predicate as the spectrum
/// side.
fn julia_escape_level(z: Complex64, probs: &ProbabilitySequence, max_levels: u32) -> u32 {
    let d = probs.d();
    let escape_sq = {
        let r = 1.0 + ESCAPE_TOLERANCE;
        r * r
    };
    let mut w = z;
    for level in 1..=max_levels {
        w = apply_g(w, probs.p(level as usize + 1), d);
        if !(w.norm_sqr() <= escape_sq) {
            return level;
        }
    }
    0
}

/// Rasterizes escape levels over the configured window.
pub fn render(probs: &ProbabilitySequence, config: &RenderConfig) -> Raster {
    assert!(config.width_px > 0 && config.height_px > 0);
    assert!(config.max_levels > 0);
    let requested = config
        .window
        .unwrap_or_else(|| default_window(probs, config.coords));
    assert!(
        requested.width > 0.0 && requested.height > 0.0,
        "window must have positive extent"
    );
    let (window, scale) = effective_window(requested, config.width_px, config.height_px);

    let w = config.width_px as usize;
    let h = config.height_px as usize;
    let left = window.center_re - window.width / 2.0;
    let top = window.center_im + window.height / 2.0;
    let mut levels = vec![0u32; w * h];
    for row in 0..h {
        let im = top - (row as f64 + 0.5) * scale;
        for col in 0..w {
            let re = left + (col as f64 + 0.5) * scale;
            let z = Complex64::new(re, im);
            levels[row * w + col] = match config.coords {
                CoordinateSystem::Spectrum => {
                    match iterate_f(z, probs, config.max_levels as usize).status {
                        OrbitStatus::Bounded { .. } => 0,
                        OrbitStatus::Escaped { level, .. } => level as u32,
                    }
                }
                CoordinateSystem::FilledJulia => {
                    julia_escape_level(z, probs, config.max_levels)
                }
            };
        }
    }

    Raster {
        width: config.width_px,
        height: config.height_px,
        levels,
        meta: RasterMeta {
            probs: probs.to_json(),
            coords: config.coords,
            max_levels: config.max_levels,
            window,
            inside_is_over_approximation: true,
        },
    }
}

/// Binary PGM (P5), one byte per pixel: the escape level clamped to 255,
/// so the inside region is black.
pub fn write_pgm<P: AsRef<Path>>(path: P, raster: &Raster) -> IoResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", raster.width, raster.height)?;
    let bytes: Vec<u8> = raster.levels.iter().map(|&l| l.min(255) as u8).collect();
    out.write_all(&bytes)?;
    out.flush()
}

/// Plain CSV of every pixel: `row,col,level`.
pub fn write_levels_csv<P: AsRef<Path>>(path: P, raster: &Raster) -> IoResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "row,col,level")?;
    for row in 0..raster.height {
        for col in 0..raster.width {
            writeln!(out, "{},{},{}", row, col, raster.level_at(row, col))?;
        }
    }
    out.flush()
}

/// Counts 4-connected components of the rendered inside region (level 0).
///
/// With a window containing the whole set and a generous budget this
/// matches the component count of the set itself; it is the pixel-level
/// witness for the connectedness classifier.
pub fn inside_component_count(raster: &Raster) -> u64 {
    let w = raster.width as usize;
    let h = raster.height as usize;
    let inside = |idx: usize| raster.levels[idx] == 0;
    let mut seen = vec![false; w * h];
    let mut components = 0u64;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || !inside(start) {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let row = idx / w;
            let col = idx % w;
            let mut visit = |n: usize| {
                if !seen[n] && inside(n) {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if col > 0 {
                visit(idx - 1);
            }
            if col + 1 < w {
                visit(idx + 1);
            }
            if row > 0 {
                visit(idx - w);
            }
            if row + 1 < h {
                visit(idx + w);
            }
        }
    }
    components
}

/// Sizes (pixel counts) of the 4-connected inside components, descending.
pub fn inside_component_sizes(raster: &Raster) -> Vec<usize> {
    let w = raster.width as usize;
    let h = raster.height as usize;
    let inside = |idx: usize| raster.levels[idx] == 0;
    let mut seen = vec![false; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || !inside(start) {
            continue;
        }
        let mut size = 0usize;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            size += 1;
            let row = idx / w;
            let col = idx % w;
            let mut visit = |n: usize| {
                if !seen[n] && inside(n) {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if col > 0 {
                visit(idx - 1);
            }
            if col + 1 < w {
                visit(idx + 1);
            }
            if row > 0 {
                visit(idx - w);
            }
            if row + 1 < h {
                visit(idx + w);
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}
