//! Fourier-domain surgery on real image patches: phase swaps, amplitude
//! flattening, amplitude transplants, radial spectra, and the binary-PGM
//! corpus plumbing the texture experiments run on.
//!
//! The 2-D transform is the separable extension of the 1-D convention in
//! [`crate::fourier`]: forward `Z_{pq} = Σ_{mn} x_{mn} e^{-2πi(pm/H + qn/W)}`
//! with no prefactor, inverse carries `1/(HW)`. Every surgery below acts on
//! amplitudes and phases separately and preserves conjugate symmetry by
//! construction, so outputs are real.
//!
//! The DC mode is excluded from flattening and transplants (it is set to 0):
//! patches are mean-subtracted before training, and a resurrected DC would
//! reintroduce a mean offset that has nothing to do with phase structure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fourier::FftPlan;
use crate::{Error, Result};

/// What `normalize` removed from the raw pixels: the original mean and the
/// Euclidean norm of the centered patch. Together with the target norm these
/// invert the normalization exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationRecord {
    pub mean: f64,
    pub norm: f64,
}

/// A real grayscale image patch, row-major, with its class label.
#[derive(Clone, Debug)]
pub struct ImagePatch {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
    pub class_label: usize,
    pub normalization: Option<NormalizationRecord>,
}

impl ImagePatch {
    /// Pixels are row-major, `pixels[i * width + j]`. Both dimensions must be
    /// at least 4 and every pixel finite.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>, class_label: usize) -> Result<Self> {
        if height < 4 || width < 4 {
            return Err(Error::InvalidArgument(format!(
                "patch dimensions {height}x{width} below the 4x4 minimum"
            )));
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch { expected: height * width, got: pixels.len() });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite pixel".into()));
        }
        Ok(ImagePatch { height, width, pixels, class_label, normalization: None })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.width + j]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.pixels.iter().map(|p| p * p).sum::<f64>().sqrt()
    }

    /// Subtract the mean and rescale to `target_norm`, recording what was
    /// removed. A patch that is constant (centered norm ~ 0) cannot be
    /// normalized.
    pub fn normalize(&mut self, target_norm: f64) -> Result<()> {
        if !(target_norm > 0.0) {
            return Err(Error::InvalidArgument(format!("target norm {target_norm} must be > 0")));
        }
        let mean = self.mean();
        for p in &mut self.pixels {
            *p -= mean;
        }
        let norm = self.euclidean_norm();
        if norm < 1e-12 * (self.pixels.len() as f64).sqrt() {
            return Err(Error::ConstantPatch);
        }
        let scale = target_norm / norm;
        for p in &mut self.pixels {
            *p *= scale;
        }
        self.normalization = Some(NormalizationRecord { mean, norm });
        Ok(())
    }
}

/// The default common norm for an H x W patch: sqrt(H W), i.e. unit
/// root-mean-square pixel.
pub fn default_patch_norm(height: usize, width: usize) -> f64 {
    ((height * width) as f64).sqrt()
}

/// Mean-subtract every patch and rescale to the common default norm.
/// Parallel over patches; fails on the first constant patch.
pub fn normalize_corpus(patches: &mut [ImagePatch]) -> Result<()> {
    patches.par_iter_mut().try_for_each(|p| {
        let target = default_patch_norm(p.height, p.width);
        p.normalize(target)
    })
}

/// Forward 2-D DFT of a patch, as an H x W complex matrix.
pub fn dft2(patch: &ImagePatch) -> Vec<Vec<Complex64>> {
    let (h, w) = (patch.height, patch.width);
    let mut rows: Vec<Vec<Complex64>> = (0..h)
        .map(|i| {
            patch.pixels[i * w..(i + 1) * w].iter().map(|&p| Complex64::new(p, 0.0)).collect()
        })
        .collect();
    let plan_w = FftPlan::new(w);
    for row in &mut rows {
        plan_w.forward(row);
    }
    let plan_h = FftPlan::new(h);
    let mut col = vec![Complex64::new(0.0, 0.0); h];
    for q in 0..w {
        for (i, c) in col.iter_mut().enumerate() {
            *c = rows[i][q];
        }
        plan_h.forward(&mut col);
        for (i, c) in col.iter().enumerate() {
            rows[i][q] = *c;
        }
    }
    rows
}

/// Inverse 2-D DFT back to a real patch. The input must be conjugate
/// symmetric, `Z[(H-p)%H][(W-q)%W] = conj(Z[p][q])`, to a tolerance scaled by
/// the largest coefficient; the output patch carries label 0.
pub fn idft2(spectrum: &[Vec<Complex64>]) -> Result<ImagePatch> {
    let h = spectrum.len();
    let w = spectrum.first().map_or(0, Vec::len);
    if spectrum.iter().any(|row| row.len() != w) {
        return Err(Error::InvalidArgument("ragged spectrum matrix".into()));
    }
    let scale = spectrum
        .iter()
        .flat_map(|row| row.iter().map(|z| z.norm()))
        .fold(1.0f64, f64::max);
    let tol = 1e-8 * scale;
    for p in 0..h {
        for q in 0..w {
            let mirror = spectrum[(h - p) % h][(w - q) % w].conj();
            if (spectrum[p][q] - mirror).norm() > tol {
                return Err(Error::SymmetryViolation { k: p * w + q });
            }
        }
    }
    let mut rows: Vec<Vec<Complex64>> = spectrum.to_vec();
    let plan_h = FftPlan::new(h);
    let mut col = vec![Complex64::new(0.0, 0.0); h];
    for q in 0..w {
        for (i, c) in col.iter_mut().enumerate() {
            *c = rows[i][q];
        }
        plan_h.inverse(&mut col);
        for (i, c) in col.iter().enumerate() {
            rows[i][q] = *c;
        }
    }
    let plan_w = FftPlan::new(w);
    let mut pixels = Vec::with_capacity(h * w);
    for row in &mut rows {
        plan_w.inverse(row);
        for z in row.iter() {
            debug_assert!(z.im.abs() <= tol, "imaginary residue {} after symmetric idft2", z.im);
            pixels.push(z.re);
        }
    }
    ImagePatch::new(h, w, pixels, 0)
}

/// `|amp|` from one spectrum, `arg` from the other, mode by mode. Conjugate
/// symmetry survives: amplitudes are mirror-even and phases mirror-odd.
fn recombine(amp: &[Vec<Complex64>], phase: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    amp.iter()
        .zip(phase)
        .map(|(ra, rp)| {
            ra.iter().zip(rp).map(|(a, p)| Complex64::from_polar(a.norm(), p.arg())).collect()
        })
        .collect()
}

/// Swap Fourier phases between two patches of equal dimensions: the first
/// output keeps `a`'s amplitudes with `b`'s phases, the second the reverse.
/// Labels follow the amplitude donor; relabeling by phase is the caller's
/// choice.
pub fn phase_swap(a: &ImagePatch, b: &ImagePatch) -> Result<(ImagePatch, ImagePatch)> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::DimensionMismatch {
            expected: a.height * a.width,
            got: b.height * b.width,
        });
    }
    let sa = dft2(a);
    let sb = dft2(b);
    let mut out_a = idft2(&recombine(&sa, &sb))?;
    let mut out_b = idft2(&recombine(&sb, &sa))?;
    out_a.class_label = a.class_label;
    out_b.class_label = b.class_label;
    Ok((out_a, out_b))
}

/// Set every Fourier amplitude to exactly 1 (phases kept, DC to 0) and invert.
///
/// No pixel rescale happens here: unit amplitudes already pin the Euclidean
/// norm, via Parseval, to sqrt((HW-1)/(HW)), and rescaling would destroy the
/// exact unit spectrum. Corpus pipelines renormalize afterwards, uniformly
/// with the unsurgered variants. Zero-amplitude modes come out with phase 0.
pub fn flatten_amplitudes(patch: &ImagePatch) -> ImagePatch {
    let mut spec = dft2(patch);
    for (p, row) in spec.iter_mut().enumerate() {
        for (q, z) in row.iter_mut().enumerate() {
            if p == 0 && q == 0 {
                *z = Complex64::new(0.0, 0.0);
            } else {
                let r = z.norm();
                *z = if r == 0.0 { Complex64::new(1.0, 0.0) } else { *z / r };
            }
        }
    }
    let mut out = idft2(&spec).expect("unit-amplitude spectrum is conjugate symmetric");
    out.class_label = patch.class_label;
    out
}

/// Replace `target`'s Fourier amplitudes by those of `source_class[pairing]`,
/// keeping `target`'s phases (and label). DC is set to 0.
pub fn transplant_amplitudes(
    source_class: &[ImagePatch],
    target: &ImagePatch,
    pairing: usize,
) -> Result<ImagePatch> {
    let source = source_class
        .get(pairing)
        .ok_or(Error::PairingExhausted { index: pairing, len: source_class.len() })?;
    if source.height != target.height || source.width != target.width {
        return Err(Error::DimensionMismatch {
            expected: target.height * target.width,
            got: source.height * source.width,
        });
    }
    let mut spec = recombine(&dft2(source), &dft2(target));
    spec[0][0] = Complex64::new(0.0, 0.0);
    let mut out = idft2(&spec)?;
    out.class_label = target.class_label;
    Ok(out)
}

/// Mean squared Fourier amplitude per radial wave-number bin, averaged over a
/// corpus and over all wave vectors rounding to the same integer `|k|`.
#[derive(Clone, Debug)]
pub struct SpectrumProfile {
    /// Radial bin centers `round(sqrt(kx^2 + ky^2))`, strictly increasing.
    pub bins: Vec<f64>,
    /// Mean of `|Z|^2` over the bin's wave vectors and the whole corpus.
    pub mean_sq_amplitude: Vec<f64>,
    /// Wave vectors per bin (per patch; independent of corpus size).
    pub count: Vec<usize>,
}

impl SpectrumProfile {
    /// CSV rows `k_abs,mean_sq_amplitude,count`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("k_abs,mean_sq_amplitude,count\n");
        for i in 0..self.bins.len() {
            out.push_str(&format!(
                "{},{:.9e},{}\n",
                self.bins[i], self.mean_sq_amplitude[i], self.count[i]
            ));
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Signed frequency of row/column index `i` out of `n`: `i` for `i <= n/2`,
/// else `i - n`.
fn signed_freq(i: usize, n: usize) -> f64 {
    if 2 * i <= n {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Radially averaged squared amplitude spectrum of a corpus with common
/// dimensions. The `k = 0` bin is the DC mode alone.
pub fn radial_spectrum(patches: &[ImagePatch]) -> Result<SpectrumProfile> {
    let first = patches
        .first()
        .ok_or_else(|| Error::InvalidArgument("radial_spectrum needs at least one patch".into()))?;
    let (h, w) = (first.height, first.width);
    if let Some(bad) = patches.iter().find(|p| p.height != h || p.width != w) {
        return Err(Error::DimensionMismatch { expected: h * w, got: bad.height * bad.width });
    }
    // bin index for each mode, computed once
    let bin_of: Vec<usize> = (0..h * w)
        .map(|idx| {
            let (p, q) = (idx / w, idx % w);
            let (kx, ky) = (signed_freq(p, h), signed_freq(q, w));
            (kx * kx + ky * ky).sqrt().round() as usize
        })
        .collect();
    let n_bins = bin_of.iter().max().unwrap() + 1;
    // per-patch partials are combined in corpus order: a parallel tree
    // reduction would make the float sums (and exported CSV bytes) depend on
    // scheduling
    let partials: Vec<Vec<f64>> = patches
        .par_iter()
        .map(|patch| {
            let spec = dft2(patch);
            let mut acc = vec![0.0f64; n_bins];
            for (idx, &b) in bin_of.iter().enumerate() {
                acc[b] += spec[idx / w][idx % w].norm_sqr();
            }
            acc
        })
        .collect();
    let mut sums = vec![0.0f64; n_bins];
    for part in &partials {
        for (x, y) in sums.iter_mut().zip(part) {
            *x += y;
        }
    }
    let mut mode_count = vec![0usize; n_bins];
    for &b in &bin_of {
        mode_count[b] += 1;
    }
    let mut bins = Vec::new();
    let mut mean = Vec::new();
    let mut count = Vec::new();
    for b in 0..n_bins {
        if mode_count[b] == 0 {
            continue;
        }
        bins.push(b as f64);
        mean.push(sums[b] / (mode_count[b] * patches.len()) as f64);
        count.push(mode_count[b]);
    }
    Ok(SpectrumProfile { bins, mean_sq_amplitude: mean, count })
}

// ---------------------------------------------------------------------------
// PGM corpus IO
// ---------------------------------------------------------------------------

/// Byte cursor over a PGM header: whitespace-separated tokens, `#` comments
/// running to end of line.
struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn skip_filler(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str, path: &Path) -> Result<usize> {
        let tok = self.token().ok_or_else(|| parse_err(path, format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, format!("bad {what}")))
    }
}

fn parse_err(path: &Path, detail: String) -> Error {
    Error::Parse { what: path.display().to_string(), detail }
}

/// Read a binary (P5) PGM with `maxval <= 255`. Pixels keep their raw byte
/// values as `f64`; the label is 0.
pub fn read_pgm(path: &Path) -> Result<ImagePatch> {
    let bytes = fs::read(path)?;
    let mut cur = PgmCursor { bytes: &bytes, pos: 0 };
    if cur.token() != Some(b"P5".as_slice()) {
        return Err(parse_err(path, "not a binary PGM (magic P5)".into()));
    }
    let width = cur.number("width", path)?;
    let height = cur.number("height", path)?;
    let maxval = cur.number("maxval", path)?;
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(path, format!("unsupported maxval {maxval} (need 1..=255)")));
    }
    // exactly one whitespace byte separates the header from the raster
    cur.pos += 1;
    let raster = bytes
        .get(cur.pos..cur.pos + height * width)
        .ok_or_else(|| parse_err(path, "truncated raster".into()))?;
    let pixels = raster.iter().map(|&b| b as f64).collect();
    ImagePatch::new(height, width, pixels, 0)
}

/// Write a binary (P5) PGM, linearly rescaling `[min, max]` pixels to
/// `0..=255` (a constant patch becomes mid-gray). Already-byte-valued patches
/// spanning the full range round-trip exactly.
pub fn write_pgm(path: &Path, patch: &ImagePatch) -> Result<()> {
    let lo = patch.pixels.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = patch.pixels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = Vec::with_capacity(32 + patch.pixels.len());
    write!(out, "P5\n{} {}\n255\n", patch.width, patch.height)?;
    for &p in &patch.pixels {
        let v = if span > 0.0 { ((p - lo) / span * 255.0).round() } else { 128.0 };
        out.push(v as u8);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load a corpus laid out as `<root>/<class_name>/*.pgm` with a `manifest.txt`
/// listing class names one per line. Labels are manifest line indices; files
/// within a class are read in sorted name order. Every class must contribute
/// at least one patch.
pub fn load_corpus(root: &Path) -> Result<(Vec<ImagePatch>, Vec<String>)> {
    let manifest = fs::read_to_string(root.join("manifest.txt"))?;
    let class_names: Vec<String> =
        manifest.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if class_names.is_empty() {
        return Err(Error::InvalidArgument("manifest.txt lists no classes".into()));
    }
    let mut patches = Vec::new();
    for (label, name) in class_names.iter().enumerate() {
        let dir = root.join(name);
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::InvalidArgument(format!("class '{name}' has no .pgm files")));
        }
        for file in files {
            let mut patch = read_pgm(&file)?;
            patch.class_label = label;
            patches.push(patch);
        }
    }
    Ok((patches, class_names))
}

/// Save a corpus in the layout `load_corpus` reads: per-class directories of
/// `patch_NNNN.pgm` (encounter order within each class) plus `manifest.txt`.
/// Every label must index into `class_names`.
pub fn save_corpus(root: &Path, patches: &[ImagePatch], class_names: &[String]) -> Result<()> {
    if let Some(bad) = patches.iter().find(|p| p.class_label >= class_names.len()) {
        return Err(Error::InvalidArgument(format!(
            "label {} out of range for {} classes",
            bad.class_label,
            class_names.len()
        )));
    }
    fs::create_dir_all(root)?;
    let mut manifest = String::new();
    for name in class_names {
        manifest.push_str(name);
        manifest.push('\n');
        fs::create_dir_all(root.join(name))?;
    }
    fs::write(root.join("manifest.txt"), manifest)?;
    let mut per_class = vec![0usize; class_names.len()];
    for patch in patches {
        let idx = per_class[patch.class_label];
        per_class[patch.class_label] += 1;
        let file =
            root.join(&class_names[patch.class_label]).join(format!("patch_{idx:04}.pgm"));
        write_pgm(&file, patch)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn random_patch(h: usize, w: usize, label: usize, seed: u64) -> ImagePatch {
        let mut rng = stream(seed, 7);
        let pixels = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ImagePatch::new(h, w, pixels, label).unwrap()
    }

    fn max_pixel_diff(a: &ImagePatch, b: &ImagePatch) -> f64 {
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// White-noise patch whose spectrum is then forced to exact amplitudes
    /// `profile(kx, ky)` with the noise's own phases (DC from the profile too).
    fn field_with_profile(
        h: usize,
        w: usize,
        profile: impl Fn(f64, f64) -> f64,
        seed: u64,
    ) -> ImagePatch {
        let base = random_patch(h, w, 0, seed);
        let mut spec = dft2(&base);
        for p in 0..h {
            for q in 0..w {
                let a = profile(signed_freq(p, h), signed_freq(q, w));
                let r = spec[p][q].norm();
                spec[p][q] = if r == 0.0 {
                    Complex64::new(a, 0.0)
                } else {
                    spec[p][q] / r * a
                };
            }
        }
        idft2(&spec).unwrap()
    }

    #[test]
    fn image_patch_validation() {
        assert!(ImagePatch::new(3, 8, vec![0.0; 24], 0).is_err());
        assert!(ImagePatch::new(8, 3, vec![0.0; 24], 0).is_err());
        assert!(matches!(
            ImagePatch::new(4, 4, vec![0.0; 15], 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ImagePatch::new(4, 4, vec![f64::NAN; 16], 0).is_err());
        let p = ImagePatch::new(4, 5, (0..20).map(|i| i as f64).collect(), 3).unwrap();
        assert_eq!(p.pixel(2, 3), 13.0);
        assert_eq!(p.class_label, 3);
    }

    #[test]
    fn normalize_examples() {
        let mut p = random_patch(8, 8, 0, 1);
        p.normalize(default_patch_norm(8, 8)).unwrap();
        assert!(p.mean().abs() < 1e-10);
        assert!((p.euclidean_norm() - 8.0).abs() < 1e-10);
        let rec = p.normalization.unwrap();
        assert!(rec.norm > 0.0);

        // already normalized: a second pass is the identity
        let before = p.clone();
        p.normalize(8.0).unwrap();
        assert!(max_pixel_diff(&before, &p) < 1e-12);

        let mut flat = ImagePatch::new(4, 4, vec![3.5; 16], 0).unwrap();
        assert!(matches!(flat.normalize(4.0), Err(Error::ConstantPatch)));
    }

    #[test]
    fn normalize_corpus_examples() {
        let mut patches: Vec<ImagePatch> = (0..5).map(|i| random_patch(8, 8, 0, i)).collect();
        normalize_corpus(&mut patches).unwrap();
        for p in &patches {
            assert!(p.mean().abs() < 1e-10);
            assert!((p.euclidean_norm() - 8.0).abs() < 1e-10);
        }
        patches.push(ImagePatch::new(4, 4, vec![1.0; 16], 0).unwrap());
        assert!(normalize_corpus(&mut patches).is_err());
    }

    /// Oracle: the separable implementation must match the O(N^4) double-sum
    /// definition, including on non-power-of-two dimensions.
    #[test]
    fn dft2_matches_direct_definition() {
        let patch = random_patch(6, 5, 0, 2);
        let spec = dft2(&patch);
        let (h, w) = (6usize, 5usize);
        for p in 0..h {
            for q in 0..w {
                let mut direct = Complex64::new(0.0, 0.0);
                for m in 0..h {
                    for n in 0..w {
                        let angle = -std::f64::consts::TAU
                            * (p as f64 * m as f64 / h as f64 + q as f64 * n as f64 / w as f64);
                        direct += patch.pixel(m, n) * Complex64::from_polar(1.0, angle);
                    }
                }
                assert!((spec[p][q] - direct).norm() < 1e-9, "mode ({p},{q})");
            }
        }
    }

    #[test]
    fn dft2_examples() {
        // constant patch: DC-only spectrum
        let c = ImagePatch::new(8, 8, vec![2.0; 64], 0).unwrap();
        let spec = dft2(&c);
        assert!((spec[0][0] - Complex64::new(128.0, 0.0)).norm() < 1e-9);
        for p in 0..8 {
            for q in 0..8 {
                if (p, q) != (0, 0) {
                    assert!(spec[p][q].norm() < 1e-9);
                }
            }
        }

        // delta patch: flat amplitude spectrum with linear phase
        let mut pixels = vec![0.0; 64];
        pixels[2 * 8 + 3] = 1.0;
        let d = ImagePatch::new(8, 8, pixels, 0).unwrap();
        let spec = dft2(&d);
        for (p, row) in spec.iter().enumerate() {
            for (q, z) in row.iter().enumerate() {
                assert!((z.norm() - 1.0).abs() < 1e-9);
                let expect = -std::f64::consts::TAU * (p as f64 * 2.0 + q as f64 * 3.0) / 8.0;
                let diff = (z.arg() - expect).rem_euclid(std::f64::consts::TAU);
                assert!(diff < 1e-9 || diff > std::f64::consts::TAU - 1e-9);
            }
        }

        // round trip on a random 16x16
        let patch = random_patch(16, 16, 0, 3);
        let back = idft2(&dft2(&patch)).unwrap();
        assert!(max_pixel_diff(&patch, &back) < 1e-9);
    }

    #[test]
    fn idft2_rejects_broken_symmetry() {
        let patch = random_patch(8, 8, 0, 4);
        let mut spec = dft2(&patch);
        spec[1][2] += Complex64::new(0.5, 0.0);
        assert!(matches!(idft2(&spec), Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn phase_swap_examples() {
        let a = random_patch(16, 16, 0, 5);
        let b = random_patch(16, 16, 1, 6);

        // self swap is the identity
        let (sa, sb) = phase_swap(&a, &a).unwrap();
        assert!(max_pixel_diff(&sa, &a) < 1e-9);
        assert!(max_pixel_diff(&sb, &a) < 1e-9);

        // amplitudes stay with the donor, labels too
        let (ab, ba) = phase_swap(&a, &b).unwrap();
        assert_eq!(ab.class_label, 0);
        assert_eq!(ba.class_label, 1);
        let (spec_ab, spec_a) = (dft2(&ab), dft2(&a));
        let (spec_ba, spec_b) = (dft2(&ba), dft2(&b));
        for p in 0..16 {
            for q in 0..16 {
                assert!((spec_ab[p][q].norm() - spec_a[p][q].norm()).abs() < 1e-9);
                assert!((spec_ba[p][q].norm() - spec_b[p][q].norm()).abs() < 1e-9);
            }
        }

        // involution
        let (back_a, back_b) = phase_swap(&ab, &ba).unwrap();
        assert!(max_pixel_diff(&back_a, &a) < 1e-9);
        assert!(max_pixel_diff(&back_b, &b) < 1e-9);

        let small = random_patch(8, 8, 0, 7);
        assert!(matches!(phase_swap(&a, &small), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn flatten_examples() {
        let patch = random_patch(16, 16, 2, 8);
        let flat = flatten_amplitudes(&patch);
        assert_eq!(flat.class_label, 2);
        assert!(flat.mean().abs() < 1e-12, "DC = 0 forces mean 0");

        let spec = dft2(&flat);
        let orig = dft2(&patch);
        assert!(spec[0][0].norm() < 1e-9);
        for p in 0..16 {
            for q in 0..16 {
                if (p, q) == (0, 0) {
                    continue;
                }
                assert!((spec[p][q].norm() - 1.0).abs() < 1e-9, "mode ({p},{q})");
                // phases preserved on (generically all-nonzero) modes
                let d = (spec[p][q].arg() - orig[p][q].arg()).rem_euclid(std::f64::consts::TAU);
                assert!(d < 1e-9 || d > std::f64::consts::TAU - 1e-9);
            }
        }

        // Parseval pins the norm of a unit spectrum
        let expect = ((16.0 * 16.0 - 1.0) / (16.0 * 16.0) as f64).sqrt();
        assert!((flat.euclidean_norm() - expect).abs() < 1e-9);

        // idempotent
        let again = flatten_amplitudes(&flat);
        assert!(max_pixel_diff(&again, &flat) < 1e-12);
    }

    #[test]
    fn transplant_examples() {
        let mut target = random_patch(8, 8, 1, 9);
        target.normalize(8.0).unwrap();
        // self transplant on a mean-zero patch is the identity
        let out = transplant_amplitudes(std::slice::from_ref(&target), &target, 0).unwrap();
        assert!(max_pixel_diff(&out, &target) < 1e-9);

        let source = vec![random_patch(8, 8, 0, 10), random_patch(8, 8, 0, 11)];
        let out = transplant_amplitudes(&source, &target, 1).unwrap();
        assert_eq!(out.class_label, 1);
        let (spec_out, spec_src, spec_tgt) = (dft2(&out), dft2(&source[1]), dft2(&target));
        for p in 0..8 {
            for q in 0..8 {
                if (p, q) == (0, 0) {
                    assert!(spec_out[0][0].norm() < 1e-9);
                    continue;
                }
                assert!((spec_out[p][q].norm() - spec_src[p][q].norm()).abs() < 1e-9);
                let d =
                    (spec_out[p][q].arg() - spec_tgt[p][q].arg()).rem_euclid(std::f64::consts::TAU);
                assert!(d < 1e-9 || d > std::f64::consts::TAU - 1e-9);
            }
        }

        assert!(matches!(
            transplant_amplitudes(&source, &target, 2),
            Err(Error::PairingExhausted { index: 2, len: 2 })
        ));
        let big = random_patch(16, 16, 1, 12);
        assert!(matches!(
            transplant_amplitudes(&source, &big, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn radial_spectrum_flat_for_white_noise() {
        let patches: Vec<ImagePatch> = (0..200).map(|i| random_patch(16, 16, 0, 100 + i)).collect();
        let prof = radial_spectrum(&patches).unwrap();
        assert!(prof.bins.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(prof.count.iter().sum::<usize>(), 256);
        // pixels are Unif(-1,1), variance 1/3: E|Z|^2 = HW/3 at every mode
        let expect = 256.0 / 3.0;
        for (i, &b) in prof.bins.iter().enumerate() {
            if b < 1.0 {
                continue; // DC bin: single mode, large relative MC error
            }
            let rel = (prof.mean_sq_amplitude[i] - expect).abs() / expect;
            // |Z|^2 has relative sd ~ 1 per mode: 200 patches x count modes
            let se = 1.0 / ((200 * prof.count[i]) as f64).sqrt();
            assert!(rel < 6.0 * se + 0.02, "bin {b}: rel {rel} vs se {se}");
        }
    }

    #[test]
    fn radial_spectrum_pure_mode_spike() {
        // cos mode (kx, ky) = (3, 4): spike at |k| = 5 only
        let (h, w) = (16usize, 16usize);
        let pixels: Vec<f64> = (0..h * w)
            .map(|idx| {
                let (m, n) = (idx / w, idx % w);
                (std::f64::consts::TAU * (3.0 * m as f64 / h as f64 + 4.0 * n as f64 / w as f64))
                    .cos()
            })
            .collect();
        let patch = ImagePatch::new(h, w, pixels, 0).unwrap();
        let prof = radial_spectrum(std::slice::from_ref(&patch)).unwrap();
        for (i, &b) in prof.bins.iter().enumerate() {
            if (b - 5.0).abs() < 0.5 {
                assert!(prof.mean_sq_amplitude[i] > 1.0);
            } else {
                assert!(prof.mean_sq_amplitude[i] < 1e-9, "bin {b} leaked");
            }
        }
    }

    #[test]
    fn radial_spectrum_powerlaw_slope() {
        // amplitude 1/|k| => squared amplitude slope -2 in log-log
        let patches: Vec<ImagePatch> = (0..40)
            .map(|i| {
                field_with_profile(
                    32,
                    32,
                    |kx, ky| {
                        let k = (kx * kx + ky * ky).sqrt();
                        if k == 0.0 {
                            0.0
                        } else {
                            1.0 / k
                        }
                    },
                    500 + i,
                )
            })
            .collect();
        let prof = radial_spectrum(&patches).unwrap();
        let pts: Vec<(f64, f64)> = prof
            .bins
            .iter()
            .zip(&prof.mean_sq_amplitude)
            .filter(|(&b, &s)| b >= 1.0 && b <= 12.0 && s > 0.0)
            .map(|(&b, &s)| (b.ln(), s.ln()))
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (
            pts.iter().map(|p| p.0).sum::<f64>() / n,
            pts.iter().map(|p| p.1).sum::<f64>() / n,
        );
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 2.0).abs() < 0.2, "fitted slope {slope}");
    }

    #[test]
    fn radial_spectrum_rejects_bad_input() {
        assert!(radial_spectrum(&[]).is_err());
        let mixed = vec![random_patch(8, 8, 0, 13), random_patch(16, 16, 0, 14)];
        assert!(matches!(radial_spectrum(&mixed), Err(Error::DimensionMismatch { .. })));
    }

    /// After an amplitude transplant the two classes share second-order
    /// statistics: the squared-amplitude spectra match exactly and the pixel
    /// covariance estimates converge together.
    #[test]
    fn transplant_matches_covariances() {
        let (h, w) = (8usize, 8usize);
        let n_patches = 600usize;
        let amp_a = |kx: f64, ky: f64| {
            let k = (kx * kx + ky * ky).sqrt();
            if k == 0.0 {
                0.0
            } else {
                8.0 / (1.0 + k)
            }
        };
        let amp_b = |kx: f64, ky: f64| {
            if kx == 0.0 && ky == 0.0 {
                0.0
            } else {
                4.0
            }
        };
        let class_a: Vec<ImagePatch> =
            (0..n_patches).map(|i| field_with_profile(h, w, amp_a, 1000 + i as u64)).collect();
        let class_b: Vec<ImagePatch> =
            (0..n_patches).map(|i| field_with_profile(h, w, amp_b, 9000 + i as u64)).collect();
        let class_b_surgered: Vec<ImagePatch> = class_b
            .iter()
            .enumerate()
            .map(|(i, t)| transplant_amplitudes(&class_a, t, i).unwrap())
            .collect();

        // squared-amplitude spectra: identical per mode after transplant
        let mean_sq = |patches: &[ImagePatch]| -> Vec<f64> {
            let mut acc = vec![0.0f64; h * w];
            for p in patches {
                let spec = dft2(p);
                for (idx, a) in acc.iter_mut().enumerate() {
                    *a += spec[idx / w][idx % w].norm_sqr() / n_patches as f64;
                }
            }
            acc
        };
        let (sq_a, sq_b) = (mean_sq(&class_a), mean_sq(&class_b_surgered));
        for (x, y) in sq_a.iter().zip(&sq_b) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }

        // pixel covariance estimates: transplant closes most of the gap
        let cov = |patches: &[ImagePatch]| -> Vec<f64> {
            let d = h * w;
            let mut acc = vec![0.0f64; d * d];
            for p in patches {
                for i in 0..d {
                    for j in 0..d {
                        acc[i * d + j] += p.pixels()[i] * p.pixels()[j] / n_patches as f64;
                    }
                }
            }
            acc
        };
        let frob = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        let (cov_a, cov_b, cov_s) = (cov(&class_a), cov(&class_b), cov(&class_b_surgered));
        let before = frob(&cov_a, &cov_b);
        let after = frob(&cov_a, &cov_s);
        assert!(
            after < 0.2 * before,
            "covariance gap did not close: before {before}, after {after}"
        );
    }

    #[test]
    fn pgm_roundtrip_and_parsing() {
        let dir = std::env::temp_dir().join(format!("surgery_pgm_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();

        let mut rng = stream(21, 7);
        let mut pixels: Vec<f64> = (0..8 * 8).map(|_| rng.gen_range(0..=255) as f64).collect();
        pixels[0] = 0.0;
        pixels[1] = 255.0; // full range makes the min-max write exact
        let patch = ImagePatch::new(8, 8, pixels, 0).unwrap();
        let file = dir.join("roundtrip.pgm");
        write_pgm(&file, &patch).unwrap();
        let back = read_pgm(&file).unwrap();
        assert_eq!(back.height(), 8);
        assert_eq!(back.width(), 8);
        assert_eq!(back.pixels(), patch.pixels());

        // header comments are skipped
        let commented = b"P5 # magic\n# a comment line\n6 4 # dims\n255\n".to_vec();
        let mut bytes = commented;
        bytes.extend(std::iter::repeat_n(7u8, 24));
        let file2 = dir.join("commented.pgm");
        fs::write(&file2, bytes).unwrap();
        let p2 = read_pgm(&file2).unwrap();
        assert_eq!((p2.height(), p2.width()), (4, 6));
        assert!(p2.pixels().iter().all(|&v| v == 7.0));

        // bad magic, big maxval, truncated raster
        fs::write(dir.join("bad1.pgm"), b"P2\n4 4\n255\n").unwrap();
        assert!(read_pgm(&dir.join("bad1.pgm")).is_err());
        fs::write(dir.join("bad2.pgm"), b"P5\n4 4\n65535\n").unwrap();
        assert!(read_pgm(&dir.join("bad2.pgm")).is_err());
        let mut short = b"P5\n4 4\n255\n".to_vec();
        short.extend_from_slice(&[1, 2, 3]);
        fs::write(dir.join("bad3.pgm"), short).unwrap();
        assert!(read_pgm(&dir.join("bad3.pgm")).is_err());

        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn corpus_roundtrip() {
        let dir = std::env::temp_dir().join(format!("surgery_corpus_{}", std::process::id()));
        let names = vec!["stripes".to_string(), "spots".to_string()];
        let mut patches = Vec::new();
        for label in 0..2 {
            for i in 0..3 {
                let mut rng = stream(40 + label as u64, i);
                let mut pixels: Vec<f64> =
                    (0..64).map(|_| rng.gen_range(0..=255) as f64).collect();
                pixels[0] = 0.0;
                pixels[63] = 255.0;
                patches.push(ImagePatch::new(8, 8, pixels, label).unwrap());
            }
        }
        save_corpus(&dir, &patches, &names).unwrap();
        let (loaded, loaded_names) = load_corpus(&dir).unwrap();
        assert_eq!(loaded_names, names);
        assert_eq!(loaded.len(), 6);
        assert_eq!(loaded.iter().filter(|p| p.class_label == 0).count(), 3);
        // class 0 files sort before later indices; pixel data survives
        for (orig, back) in patches.iter().zip(&loaded) {
            assert_eq!(orig.class_label, back.class_label);
            assert_eq!(orig.pixels(), back.pixels());
        }

        assert!(load_corpus(&dir.join("missing")).is_err());
        let bad_label = vec![ImagePatch::new(4, 4, vec![1.0; 16], 5).unwrap()];
        assert!(save_corpus(&dir, &bad_label, &names).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
