//! Grid classification, escape-band images and certified area bounds.
//!
//! The lattice includes both viewport edges, so an `n`-point axis has
//! spacing `(max - min) / (n - 1)`; row 0 is the top (largest imaginary
//! part).

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certifier::{decide, DecideConfig, Parameter, Verdict, VerdictKind};
use crate::exact_arith::{ComplexBox, ComplexRational, DyadicInterval, Rational};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid viewport: {0}")]
    Viewport(String),
    #[error("image is {width}x{height} but holds {len} bytes")]
    Dimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Viewport {
    pub re_min: Rational,
    pub re_max: Rational,
    pub im_min: Rational,
    pub im_max: Rational,
    /// Lattice points per side.
    pub n: usize,
}

impl Viewport {
    pub fn new(
        re_min: Rational,
        re_max: Rational,
        im_min: Rational,
        im_max: Rational,
        n: usize,
    ) -> Result<Self, RenderError> {
        if re_min >= re_max || im_min >= im_max {
            return Err(RenderError::Viewport(format!(
                "empty range [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        if n < 2 {
            return Err(RenderError::Viewport(format!("n = {n}, need at least 2")));
        }
        Ok(Viewport {
            re_min,
            re_max,
            im_min,
            im_max,
            n,
        })
    }

    /// `[-2, 2] x [-2, 2]`.
    pub fn square(n: usize) -> Result<Self, RenderError> {
        let (lo, hi) = (Rational::from(-2), Rational::from(2));
        Viewport::new(lo.clone(), hi.clone(), lo, hi, n)
    }

    fn steps(&self) -> (Rational, Rational) {
        let gaps = Rational::from((self.n - 1) as i64);
        (
            (&self.re_max - &self.re_min) / gaps.clone(),
            (&self.im_max - &self.im_min) / gaps,
        )
    }

    /// Lattice point at `row`, `col`.
    pub fn point(&self, row: usize, col: usize) -> ComplexRational {
        let (dre, dim) = self.steps();
        self.point_with_steps(row, col, &dre, &dim)
    }

    fn point_with_steps(
        &self,
        row: usize,
        col: usize,
        dre: &Rational,
        dim: &Rational,
    ) -> ComplexRational {
        ComplexRational::new(
            &self.re_min + &(dre * &Rational::from(col as i64)),
            &self.im_max - &(dim * &Rational::from(row as i64)),
        )
    }

    /// Closed pixel box around a lattice point, half a spacing on each side,
    /// rounded outward on the `2^-p` grid.
    pub fn pixel_box(&self, row: usize, col: usize, p: u32) -> ComplexBox {
        let (dre, dim) = self.steps();
        self.pixel_box_with_steps(row, col, &dre, &dim, p)
    }

    fn pixel_box_with_steps(
        &self,
        row: usize,
        col: usize,
        dre: &Rational,
        dim: &Rational,
        p: u32,
    ) -> ComplexBox {
        let c = self.point_with_steps(row, col, dre, dim);
        let half = Rational::new(1, 2).unwrap();
        let (hr, hi) = (dre * &half, dim * &half);
        ComplexBox::new(
            DyadicInterval::enclose_range(&(&c.re - &hr), &(&c.re + &hr), p),
            DyadicInterval::enclose_range(&(&c.im - &hi), &(&c.im + &hi), p),
        )
    }

    /// Area of one pixel for area estimates: viewport area over `n^2`.
    pub fn pixel_area(&self) -> Rational {
        let n = Rational::from(self.n as i64);
        (&self.re_max - &self.re_min) * (&self.im_max - &self.im_min) / n.square()
    }

    /// `true` when the closed pixel box of (`row`, `col`) contains `c`.
    pub fn pixel_contains(&self, row: usize, col: usize, c: &ComplexRational) -> bool {
        let (dre, dim) = self.steps();
        let centre = self.point_with_steps(row, col, &dre, &dim);
        let half = Rational::new(1, 2).unwrap();
        (&c.re - &centre.re).abs() <= &dre * &half && (&c.im - &centre.im).abs() <= &dim * &half
    }
}

/// Row-major lattice of exact grid points.
pub fn grid_points(v: &Viewport) -> Vec<ComplexRational> {
    let (dre, dim) = v.steps();
    (0..v.n)
        .flat_map(|r| (0..v.n).map(move |k| (r, k)))
        .map(|(r, k)| v.point_with_steps(r, k, &dre, &dim))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Decide each lattice point.
    Point,
    /// Decide each closed pixel box; a pixel is off only when the whole box
    /// escapes.
    Box,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub verdict: Verdict,
    /// Present exactly for `Out` verdicts.
    pub first_escape: Option<u32>,
}

impl Cell {
    fn new(verdict: Verdict) -> Self {
        Cell {
            first_escape: verdict.escape_step(),
            verdict,
        }
    }

    /// Box-mode rendering: everything not proven outside.
    pub fn is_on(&self) -> bool {
        !self.verdict.is_out()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGrid {
    pub n: usize,
    pub mode: Mode,
    pub config: DecideConfig,
    /// Row-major, `n * n` cells.
    pub cells: Vec<Cell>,
}

impl PixelGrid {
    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row * self.n + col]
    }

    pub fn counts(&self) -> VerdictCounts {
        let mut counts = VerdictCounts::default();
        for cell in &self.cells {
            match cell.verdict.kind() {
                VerdictKind::Out => counts.out += 1,
                VerdictKind::In => counts.inside += 1,
                VerdictKind::Unknown => counts.unknown += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub out: usize,
    #[serde(rename = "in")]
    pub inside: usize,
    pub unknown: usize,
}

/// Classifies every pixel of `v`. Rows are processed in parallel; the result
/// does not depend on the number of workers.
///
/// `workers = None` uses the global rayon pool.
pub fn classify_grid(
    v: &Viewport,
    cfg: &DecideConfig,
    mode: Mode,
    workers: Option<usize>,
) -> Result<PixelGrid, RenderError> {
    let run = || {
        let (dre, dim) = v.steps();
        (0..v.n)
            .into_par_iter()
            .flat_map_iter(|r| {
                let (dre, dim) = (&dre, &dim);
                (0..v.n).map(move |k| {
                    let param = match mode {
                        Mode::Point => Parameter::Point(v.point_with_steps(r, k, dre, dim)),
                        Mode::Box => {
                            Parameter::Box(v.pixel_box_with_steps(r, k, dre, dim, cfg.p0))
                        }
                    };
                    Cell::new(decide(&param, cfg))
                })
            })
            .collect::<Vec<_>>()
    };
    let cells = match workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| RenderError::Pool(e.to_string()))?
            .install(run),
    };
    Ok(PixelGrid {
        n: v.n,
        mode,
        config: cfg.clone(),
        cells,
    })
}

/// Palette index for unclassified pixels.
pub const UNKNOWN_INDEX: u8 = 0;
/// Palette index for pixels certified inside.
pub const IN_INDEX: u8 = 255;
/// Largest escape band index; later escapes share it.
pub const MAX_BAND: u8 = 254;

/// Single-channel image, row-major, top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RenderError> {
        if pixels.len() != width * height {
            return Err(RenderError::Dimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }
}

/// Band index per pixel: the first escape step for `Out` (capped at
/// [`MAX_BAND`]), [`IN_INDEX`] for certified members, [`UNKNOWN_INDEX`]
/// otherwise.
pub fn escape_bands(g: &PixelGrid) -> GrayImage {
    let pixels = g
        .cells
        .iter()
        .map(|cell| match (&cell.verdict, cell.first_escape) {
            (Verdict::Out { .. }, Some(n)) => n.min(MAX_BAND as u32) as u8,
            (Verdict::In { .. }, _) => IN_INDEX,
            _ => UNKNOWN_INDEX,
        })
        .collect();
    GrayImage {
        width: g.n,
        height: g.n,
        pixels,
    }
}

/// Fixed RGB colour for a band index.
pub fn palette(index: u8) -> [u8; 3] {
    match index {
        UNKNOWN_INDEX => [0, 0, 0],
        IN_INDEX => [255, 255, 255],
        b => {
            let b = b as u32;
            [
                ((b * 37 + 90) % 256) as u8,
                ((b * 91 + 30) % 256) as u8,
                ((b * 53 + 160) % 256) as u8,
            ]
        }
    }
}

/// Binary PGM (`P5`), maxval 255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

/// Binary PPM (`P6`) with each index mapped through `palette`.
pub fn encode_ppm(image: &GrayImage, palette: impl Fn(u8) -> [u8; 3]) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.reserve(image.pixels.len() * 3);
    for &p in &image.pixels {
        out.extend_from_slice(&palette(p));
    }
    out
}

pub fn emit_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<(), RenderError> {
    std::fs::write(path, encode_pgm(image))?;
    Ok(())
}

pub fn emit_ppm(
    image: &GrayImage,
    palette: impl Fn(u8) -> [u8; 3],
    path: impl AsRef<Path>,
) -> Result<(), RenderError> {
    std::fs::write(path, encode_ppm(image, palette))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaBounds {
    /// Pixels not proven outside.
    pub upper: Rational,
    /// Pixels proven inside.
    pub lower: Rational,
}

pub fn area_estimate(g: &PixelGrid, v: &Viewport) -> AreaBounds {
    let counts = g.counts();
    let pixel = v.pixel_area();
    AreaBounds {
        upper: &pixel * &Rational::from((counts.inside + counts.unknown) as i64),
        lower: &pixel * &Rational::from(counts.inside as i64),
    }
}

/// JSON export of a classified grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridExport {
    pub viewport: Viewport,
    pub mode: Mode,
    pub config: DecideConfig,
    pub counts: VerdictCounts,
    pub area: AreaBounds,
    /// Row-major.
    pub cells: Vec<CellExport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellExport {
    pub verdict: VerdictKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_escape: Option<u32>,
}

impl GridExport {
    pub fn new(g: &PixelGrid, v: &Viewport) -> Self {
        GridExport {
            viewport: v.clone(),
            mode: g.mode,
            config: g.config.clone(),
            counts: g.counts(),
            area: area_estimate(g, v),
            cells: g
                .cells
                .iter()
                .map(|c| CellExport {
                    verdict: c.verdict.kind(),
                    first_escape: c.first_escape,
                })
                .collect(),
        }
    }
}

/// One-line-per-run CSV: header plus counts and area bounds.
pub fn summary_csv(g: &PixelGrid, v: &Viewport) -> String {
    let counts = g.counts();
    let area = area_estimate(g, v);
    let mut s = String::from("n,budget,mode,out,in,unknown,upper,lower,upper_approx,lower_approx\n");
    let _ = writeln!(
        s,
        "{},{},{},{},{},{},{},{},{:.6},{:.6}",
        v.n,
        g.config.budget,
        match g.mode {
            Mode::Point => "point",
            Mode::Box => "box",
        },
        counts.out,
        counts.inside,
        counts.unknown,
        area.upper,
        area.lower,
        area.upper.to_f64(),
        area.lower.to_f64()
    );
    s
}
