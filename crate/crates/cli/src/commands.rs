//! Command implementations. Each returns a JSON report and whether the
//! answer is a verified negative.

use std::path::Path;

use serde_json::{json, Value};
use tileforge_core::attractor::{
    approximate_real_capped, measure_upper_profile_capped, rasterize, shift_cover_layers,
};
use tileforge_core::boxtile::{
    box_check_depth, box_digits, build_cyclic_matrix, is_parallelepiped, monomial_structure,
    tensor_product, tensor_product_real, BoxForm,
};
use tileforge_core::haar::{build_wavelets, gram_raster, hyperplane_basis, HaarFunction};
use tileforge_core::oned::{
    classify, enumerate_simple, is_l_set, tiling_oracle, IntSet1D, TilingVerdict,
};
use tileforge_core::{
    approximate_capped, bounding_box, det, tile_check_exact, DigitSet, IntMatrix, Raster, RealMatrix,
    ShiftSet, TileVerdict,
};

use crate::error::CliError;
use crate::ppm::Canvas;
use crate::spec::{ProblemSpec, System};

pub struct Outcome {
    pub report: Value,
    pub negative: bool,
}

impl Outcome {
    fn positive(report: Value) -> Self {
        Outcome {
            report,
            negative: false,
        }
    }
}

/// Limits shared by all commands.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_cells: u64,
}

/// Largest `K ≥ 1` with `m^K ≤ budget`, at most 16.
pub fn default_depth(m: u64, budget: u64) -> u32 {
    let mut k = 1;
    let mut cells = m;
    while k < 16 && m > 1 && cells.saturating_mul(m) <= budget {
        cells *= m;
        k += 1;
    }
    k
}

const DEPTH_BUDGET: u64 = 1 << 14;
const HAAR_DEPTH_BUDGET: u64 = 1 << 16;
const LAYER_WINDOW: i64 = 2;

fn digit_count(spec: &ProblemSpec) -> Result<u64, CliError> {
    Ok(match spec.system()? {
        System::Int { digits, .. } => digits.len() as u64,
        System::Real { shifts, .. } => shifts.len() as u64,
    })
}

pub fn tile_check(spec: &ProblemSpec, limits: Limits) -> Result<Outcome, CliError> {
    let (matrix, digits) = spec.int_system()?;
    let report = tile_check_exact(&matrix, &digits)?;
    let depth = spec
        .params
        .depth
        .unwrap_or_else(|| default_depth(digits.len() as u64, DEPTH_BUDGET));
    let profile = measure_upper_profile_capped(&matrix, &digits, depth, limits.max_cells)?;
    let measure_upper = profile.iter().copied().fold(f64::INFINITY, f64::min);
    let d = matrix.dim();
    let layers = if d <= 2 {
        let w = spec.params.window.unwrap_or(LAYER_WINDOW);
        let resolution = spec.params.resolution.unwrap_or(if d == 1 { 256 } else { 32 });
        let a = approximate_capped(&matrix, &digits, depth, limits.max_cells)?;
        let lr = shift_cover_layers(&a, &vec![(-w, w); d], resolution)?;
        json!({
            "histogram": lr.histogram,
            "dominant": lr.dominant,
            "boundary_fraction": lr.boundary_fraction,
            "interior_cells": lr.interior_cells,
            "window": w,
            "resolution": resolution,
        })
    } else {
        Value::Null
    };
    let negative = report.verdict == TileVerdict::NotTile;
    Ok(Outcome {
        report: json!({
            "verdict": report.verdict,
            "is_tile": report.is_tile,
            "spectral_radius": report.spectral_radius,
            "spectral_upper": report.spectral_upper,
            "residual": report.residual,
            "m": report.m,
            "measure": report.measure,
            "states": report.states.len(),
            "measure_upper": measure_upper,
            "depth": depth,
            "layers": layers,
        }),
        negative,
    })
}

pub fn tile_measure(spec: &ProblemSpec, limits: Limits) -> Result<Outcome, CliError> {
    let (matrix, digits) = spec.int_system()?;
    let depth = spec
        .params
        .depth
        .unwrap_or_else(|| default_depth(digits.len() as u64, DEPTH_BUDGET));
    let profile = measure_upper_profile_capped(&matrix, &digits, depth, limits.max_cells)?;
    let measure_upper = profile.iter().copied().fold(f64::INFINITY, f64::min);
    let bbox = bounding_box(&matrix, &digits)?;
    Ok(Outcome::positive(json!({
        "m": digits.len(),
        "depth": depth,
        "profile": profile,
        "measure_upper": measure_upper,
        "bounding_box": bbox,
    })))
}

pub struct RenderArgs<'a> {
    pub depth: Option<u32>,
    pub resolution: Option<u32>,
    pub out: &'a Path,
    /// Draw the integer translates `{0, …, W-1}^d`.
    pub tiling: Option<i64>,
    /// Draw the translates listed in the spec.
    pub translates: bool,
    pub strip: usize,
}

fn raster_of(spec: &ProblemSpec, depth: u32, resolution: u32, limits: Limits) -> Result<Raster, CliError> {
    Ok(match spec.system()? {
        System::Int { matrix, digits, .. } => {
            rasterize(&approximate_capped(&matrix, &digits, depth, limits.max_cells)?, resolution)?
        }
        System::Real { matrix, shifts } => rasterize(
            &approximate_real_capped(&matrix, &shifts, depth, limits.max_cells)?,
            resolution,
        )?,
    })
}

pub fn tile_render(spec: &ProblemSpec, args: &RenderArgs, limits: Limits) -> Result<Outcome, CliError> {
    let m = digit_count(spec)?;
    let depth = args
        .depth
        .or(spec.params.depth)
        .unwrap_or_else(|| default_depth(m, DEPTH_BUDGET));
    let resolution = args.resolution.or(spec.params.resolution).unwrap_or(64);
    if resolution == 0 {
        return Err(CliError::Input("resolution must be positive".into()));
    }
    let raster = raster_of(spec, depth, resolution, limits)?;
    let d = raster.dim();
    let translates: Vec<Vec<i64>> = match (args.tiling, args.translates) {
        (Some(_), true) => {
            return Err(CliError::Input("--tiling and --translates are exclusive".into()));
        }
        (Some(w), false) => {
            if w < 1 {
                return Err(CliError::Input("tiling window must be at least 1".into()));
            }
            lattice_box(d, w)
        }
        (None, true) => match spec.system()? {
            System::Int {
                translates: Some(t), ..
            } => t,
            _ => return Err(CliError::Input("spec lists no translates".into())),
        },
        (None, false) => vec![vec![0; d]],
    };
    let mut canvas = Canvas::covering(&raster, &translates)?;
    for (i, k) in translates.iter().enumerate() {
        canvas.paint(&raster.translated(k), i);
    }
    let coloured = args.tiling.is_some() || args.translates;
    let image = canvas.image(coloured, args.strip);
    std::fs::write(args.out, image.to_ppm()).map_err(|e| CliError::io(args.out, e))?;
    let unit = (resolution as f64).powi(d as i32);
    Ok(Outcome::positive(json!({
        "width": image.width,
        "height": image.height,
        "depth": depth,
        "resolution": resolution,
        "translates": translates.len(),
        "tile_pixels": raster.occupied_count(),
        "tile_area": raster.occupied_count() as f64 / unit,
        "covered_pixels": canvas.covered_pixels(),
        "overlap_pixels": canvas.overlap_pixels(),
    })))
}

/// `{0, …, w-1}^d` in lexicographic order, last axis fastest.
fn lattice_box(d: usize, w: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (0..w).map(move |x| {
                    let mut v = v.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn box_build(form: &BoxForm) -> Result<Outcome, CliError> {
    let matrix = build_cyclic_matrix(form)?;
    let digits = box_digits(form)?;
    Ok(Outcome::positive(json!({
        "form": form,
        "matrix": matrix.rows(),
        "det": det(&matrix)?,
        "digits": digits.digits(),
        "digit_count": digits.len(),
    })))
}

pub fn box_digits_cmd(form: &BoxForm) -> Result<Outcome, CliError> {
    let digits = box_digits(form)?;
    Ok(Outcome::positive(json!({
        "form": form,
        "digits": digits.digits(),
        "digit_count": digits.len(),
    })))
}

pub fn box_detect(spec: &ProblemSpec, limits: Limits) -> Result<Outcome, CliError> {
    let (matrix, digits) = spec.int_system()?;
    let monomial = monomial_structure(&matrix);
    let depth = match spec.params.depth {
        Some(k) => k,
        None => box_check_depth(&matrix)?,
    };
    let tol = spec.params.tol.unwrap_or(0.05);
    let a = approximate_capped(&matrix, &digits, depth, limits.max_cells)?;
    let report = is_parallelepiped(&a, tol)?;
    let (monomial_json, form) = match &monomial {
        Ok(s) => (serde_json::to_value(s).expect("serializable"), s.box_form()),
        Err(e) => (json!({ "error": e.to_string() }), None),
    };
    Ok(Outcome {
        negative: !report.is_box,
        report: json!({
            "is_box": report.is_box,
            "tol": tol,
            "parallelepiped": report,
            "monomial": monomial.is_ok(),
            "monomial_structure": monomial_json,
            "box_form": form,
        }),
    })
}

fn function_name(f: HaarFunction) -> String {
    match f {
        HaarFunction::Scaling => "scaling".into(),
        HaarFunction::Wavelet(s) => format!("wavelet_{s}"),
    }
}

pub fn haar_build(spec: &ProblemSpec) -> Result<Outcome, CliError> {
    let (matrix, digits) = spec.int_system()?;
    let sys = build_wavelets(&matrix, &digits, &hyperplane_basis(digits.len())?)?;
    let fs = sys.functions();
    let coefficients: Vec<Vec<f64>> = fs
        .iter()
        .map(|&f| (0..sys.m()).map(|k| sys.coefficient(f, k)).collect())
        .collect();
    let zero_mean = match sys.box_piece_volume {
        Some(_) => {
            let ints: Result<Vec<String>, _> = fs[1..]
                .iter()
                .map(|&f| sys.integral_exact(f).map(|s| s.to_string()))
                .collect();
            json!(ints?)
        }
        None => Value::Null,
    };
    Ok(Outcome::positive(json!({
        "m": sys.m(),
        "functions": fs.iter().map(|&f| function_name(f)).collect::<Vec<_>>(),
        "directions": (0..sys.wavelet_count()).map(|s| sys.basis.direction(s)).collect::<Vec<_>>(),
        "direction_norms_squared": (0..sys.wavelet_count()).map(|s| sys.basis.norm_squared(s)).collect::<Vec<_>>(),
        "coefficients": coefficients,
        "box_piece_volume": sys.box_piece_volume.map(|r| r.to_string()),
        "wavelet_integrals": zero_mean,
    })))
}

pub fn haar_gram(spec: &ProblemSpec, depth: Option<u32>, resolution: Option<u32>) -> Result<Outcome, CliError> {
    let (matrix, digits) = spec.int_system()?;
    let sys = build_wavelets(&matrix, &digits, &hyperplane_basis(digits.len())?)?;
    let names: Vec<String> = sys.functions().into_iter().map(function_name).collect();
    if sys.box_piece_volume.is_some() {
        let exact = sys.gram_exact()?;
        let gram: Vec<Vec<f64>> = exact.iter().map(|r| r.iter().map(|s| s.to_f64()).collect()).collect();
        let identity = exact
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, s)| if i == j { s.to_string() == "1" } else { s.is_zero() }));
        return Ok(Outcome::positive(json!({
            "method": "exact",
            "functions": names,
            "gram_exact": exact,
            "gram": gram,
            "is_identity": identity,
            "max_offdiag_deviation": max_offdiag(&gram),
            "deviation": deviation(&gram),
        })));
    }
    let depth = depth
        .or(spec.params.depth)
        .unwrap_or_else(|| default_depth(digits.len() as u64, HAAR_DEPTH_BUDGET));
    let resolution = resolution.or(spec.params.resolution).unwrap_or(128);
    let rg = gram_raster(&sys, depth, resolution)?;
    Ok(Outcome::positive(json!({
        "method": "raster",
        "functions": names,
        "gram_exact": Value::Null,
        "gram": rg.gram,
        "max_offdiag_deviation": max_offdiag(&rg.gram),
        "deviation": rg.deviation,
        "boundary_fraction": rg.boundary_fraction,
        "error_bound": rg.error_bound,
        "depth": depth,
        "resolution": resolution,
    })))
}

fn max_offdiag(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, r) in g.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            if i != j {
                worst = worst.max(x.abs());
            }
        }
    }
    worst
}

fn deviation(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, r) in g.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            worst = worst.max((x - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

pub fn oned_oracle(y: &IntSet1D, n_max: Option<i64>) -> Result<Outcome, CliError> {
    let verdict = tiling_oracle(y, n_max)?;
    let negative = matches!(verdict, TilingVerdict::NotTiling { .. });
    let mut report = serde_json::to_value(&verdict).expect("serializable");
    report["set"] = json!(y);
    Ok(Outcome { report, negative })
}

pub fn oned_classify(y: &IntSet1D) -> Result<Outcome, CliError> {
    let c = classify(y);
    let negative = !c.is_simple();
    let mut report = serde_json::to_value(&c).expect("serializable");
    report["set"] = json!(y);
    Ok(Outcome { report, negative })
}

pub fn oned_enumerate(n: i64) -> Result<Outcome, CliError> {
    let sets = enumerate_simple(n)?;
    Ok(Outcome::positive(json!({
        "n": n,
        "count": sets.len(),
        "sets": sets,
    })))
}

pub fn oned_lset(y: &IntSet1D, l: i64) -> Result<Outcome, CliError> {
    let ok = is_l_set(y, l)?;
    Ok(Outcome {
        negative: !ok,
        report: json!({ "set": y, "l": l, "is_l_set": ok }),
    })
}

pub fn product(a: &ProblemSpec, b: &ProblemSpec) -> Result<Outcome, CliError> {
    let spec = match (a.system()?, b.system()?) {
        (
            System::Int {
                matrix: m1,
                digits: s1,
                translates: t1,
            },
            System::Int {
                matrix: m2,
                digits: s2,
                translates: t2,
            },
        ) => {
            let (m, s) = tensor_product(&m1, &s1, &m2, &s2)?;
            let translates = match (t1, t2) {
                (Some(t1), Some(t2)) => Some(
                    t2.iter()
                        .flat_map(|y| t1.iter().map(move |x| x.iter().chain(y).copied().collect()))
                        .collect(),
                ),
                _ => None,
            };
            ProblemSpec::from_int_system(&m, &s, translates)
        }
        (sa, sb) => {
            let (m1, s1) = real_parts(sa)?;
            let (m2, s2) = real_parts(sb)?;
            let (m, s) = tensor_product_real(&m1, &s1, &m2, &s2)?;
            ProblemSpec::from_real_system(&m, &s)
        }
    };
    Ok(Outcome::positive(serde_json::to_value(&spec).expect("serializable")))
}

fn real_parts(s: System) -> Result<(RealMatrix, ShiftSet), CliError> {
    Ok(match s {
        System::Real { matrix, shifts } => (matrix, shifts),
        System::Int { matrix, digits, .. } => (int_to_real(&matrix)?, digits_to_shifts(&digits)?),
    })
}

fn int_to_real(m: &IntMatrix) -> Result<RealMatrix, CliError> {
    Ok(RealMatrix::new(
        m.rows().into_iter().map(|r| r.into_iter().map(|v| v as f64).collect()).collect(),
    )?)
}

fn digits_to_shifts(d: &DigitSet) -> Result<ShiftSet, CliError> {
    Ok(ShiftSet::new(
        d.digits().iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_budget() {
        assert_eq!(default_depth(2, 1 << 14), 14);
        assert_eq!(default_depth(12, 1 << 14), 3);
        assert_eq!(default_depth(1 << 20, 1 << 14), 1);
    }

    #[test]
    fn lattice_box_order() {
        assert_eq!(lattice_box(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
