//! Binary PPM output of 1-D and 2-D rasters.

use tileforge_core::Raster;

use crate::error::CliError;

/// Colours for successive translates of a tiling.
pub const PALETTE: [[u8; 3]; 12] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [174, 199, 232],
    [255, 187, 120],
];

const BACKGROUND: [u8; 3] = [255, 255, 255];
const INK: [u8; 3] = [0, 0, 0];
/// Pixels covered by two or more translates.
const OVERLAP: [u8; 3] = [0, 0, 0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// Pixel colour index: `None` for background, `Some(i)` for translate `i`,
/// `Some(usize::MAX)` for an overlap.
pub struct Canvas {
    origin: Vec<i64>,
    extent: Vec<usize>,
    owner: Vec<Option<usize>>,
}

const OVERLAPPED: usize = usize::MAX;

impl Canvas {
    /// A canvas covering every raster placed at every translate.
    pub fn covering(base: &Raster, translates: &[Vec<i64>]) -> Result<Self, CliError> {
        let d = base.dim();
        if !(1..=2).contains(&d) {
            return Err(CliError::Input(format!("images need dimension 1 or 2, got {d}")));
        }
        let r = base.resolution as i64;
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for k in translates {
            if k.len() != d {
                return Err(CliError::Input(format!(
                    "translate {k:?} has dimension {}, expected {d}",
                    k.len()
                )));
            }
            for i in 0..d {
                let o = base.origin_index[i] + k[i] * r;
                lo[i] = lo[i].min(o);
                hi[i] = hi[i].max(o + base.extent[i] as i64);
            }
        }
        let extent: Vec<usize> = (0..d).map(|i| (hi[i] - lo[i]) as usize).collect();
        let pixels = extent.iter().try_fold(1u64, |acc, &e| acc.checked_mul(e as u64));
        match pixels {
            Some(n) if n <= tileforge_core::attractor::MAX_PIXELS => Ok(Canvas {
                origin: lo,
                owner: vec![None; n as usize],
                extent,
            }),
            _ => Err(CliError::Core(tileforge_core::Error::ResourceCap {
                what: "image pixels",
                needed: pixels.unwrap_or(u64::MAX),
                cap: tileforge_core::attractor::MAX_PIXELS,
            })),
        }
    }

    fn linear(&self, idx: &[i64]) -> usize {
        let mut lin = 0;
        let mut stride = 1;
        for i in 0..idx.len() {
            lin += (idx[i] - self.origin[i]) as usize * stride;
            stride *= self.extent[i];
        }
        lin
    }

    /// Paints the occupied cells of `raster` as translate `label`.
    pub fn paint(&mut self, raster: &Raster, label: usize) {
        for (lin, &c) in raster.occupancy.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let at = self.linear(&raster.index_of(lin));
            self.owner[at] = match self.owner[at] {
                None => Some(label),
                Some(_) => Some(OVERLAPPED),
            };
        }
    }

    pub fn overlap_pixels(&self) -> usize {
        self.owner.iter().filter(|o| **o == Some(OVERLAPPED)).count()
    }

    pub fn covered_pixels(&self) -> usize {
        self.owner.iter().filter(|o| o.is_some()).count()
    }

    /// Renders with `y` pointing up; 1-D canvases become strips of `strip` rows.
    pub fn image(&self, coloured: bool, strip: usize) -> Image {
        let colour = |o: Option<usize>| match o {
            None => BACKGROUND,
            Some(OVERLAPPED) => OVERLAP,
            Some(_) if !coloured => INK,
            Some(i) => PALETTE[i % PALETTE.len()],
        };
        let width = self.extent[0];
        let (height, rows): (usize, Box<dyn Fn(usize) -> usize>) = if self.extent.len() == 1 {
            (strip.max(1), Box::new(|_| 0))
        } else {
            let h = self.extent[1];
            (h, Box::new(move |y| h - 1 - y))
        };
        let mut rgb = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            let row = rows(y);
            for x in 0..width {
                rgb.extend_from_slice(&colour(self.owner[row * width + x]));
            }
        }
        Image { width, height, rgb }
    }
}
