//! A small two-layer network trained on image corpora and evaluated against
//! phase-swapped test data: the probe that separates classifiers keyed on
//! Fourier amplitudes from classifiers keyed on phases.
//!
//! Binary labels map as class 0 -> y = +1, class 1 -> y = -1. Training is
//! plain per-example SGD on the squared error `(f(x) - y)^2` with a held-out
//! 20% test split, stratified so both classes are represented.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::rng::{stream, ChaCha8Rng};
use crate::special::Activation;
use crate::surgery::{phase_swap, ImagePatch};
use crate::{Error, Result};

/// Fully connected two-layer scalar regressor
/// `f(x) = Σ_i w2_i σ(Σ_j w1_ij x_j + b1_i) + b2`.
#[derive(Clone, Debug)]
pub struct TwoLayerNet {
    n: usize,
    k: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    pub activation: Activation,
    /// Init variances (w1, w2) actually used, recorded into reports.
    pub init_variance: (f64, f64),
}

/// The default hidden width.
pub const DEFAULT_HIDDEN: usize = 30;

impl TwoLayerNet {
    /// Zero-mean Gaussian init: w1 with variance 1/n, w2 with variance 1/k,
    /// biases zero.
    pub fn init(k: usize, n: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidArgument("hidden width and input size must be > 0".into()));
        }
        let sd1 = (1.0 / n as f64).sqrt();
        let sd2 = (1.0 / k as f64).sqrt();
        let mut normal = crate::rng::Normal::new();
        let w1 = (0..k * n).map(|_| sd1 * normal.sample(rng)).collect();
        let w2 = (0..k).map(|_| sd2 * normal.sample(rng)).collect();
        Ok(TwoLayerNet {
            n,
            k,
            w1,
            b1: vec![0.0; k],
            w2,
            b2: 0.0,
            activation,
            init_variance: (1.0 / n as f64, 1.0 / k as f64),
        })
    }

    pub fn input_size(&self) -> usize {
        self.n
    }

    pub fn hidden_size(&self) -> usize {
        self.k
    }

    fn preactivations(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "input size mismatch");
        (0..self.k)
            .map(|i| {
                let row = &self.w1[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[i]
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        self.preactivations(x)
            .iter()
            .zip(&self.w2)
            .map(|(&h, w)| w * self.activation.eval(h))
            .sum::<f64>()
            + self.b2
    }

    /// Gradient of the squared error `(f(x) - y)^2` in all parameter groups.
    pub fn mse_gradient(&self, x: &[f64], y: f64) -> NetGradient {
        let h = self.preactivations(x);
        let f = h.iter().zip(&self.w2).map(|(&h, w)| w * self.activation.eval(h)).sum::<f64>()
            + self.b2;
        let g = 2.0 * (f - y);
        let mut grad = NetGradient {
            w1: vec![0.0; self.k * self.n],
            b1: vec![0.0; self.k],
            w2: vec![0.0; self.k],
            b2: g,
        };
        for i in 0..self.k {
            grad.w2[i] = g * self.activation.eval(h[i]);
            let back = g * self.w2[i] * self.activation.deriv(h[i]);
            grad.b1[i] = back;
            for (gw, &v) in grad.w1[i * self.n..(i + 1) * self.n].iter_mut().zip(x) {
                *gw = back * v;
            }
        }
        grad
    }

    /// One SGD step: subtract `lr` times the gradient.
    pub fn apply(&mut self, grad: &NetGradient, lr: f64) {
        for (w, g) in self.w1.iter_mut().zip(&grad.w1) {
            *w -= lr * g;
        }
        for (b, g) in self.b1.iter_mut().zip(&grad.b1) {
            *b -= lr * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grad.w2) {
            *w -= lr * g;
        }
        self.b2 -= lr * grad.b2;
    }
}

/// MSE gradient, same shapes as the corresponding parameters.
#[derive(Clone, Debug)]
pub struct NetGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// `class 0 -> +1, class 1 -> -1`.
pub fn label_sign(class_label: usize) -> f64 {
    if class_label == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One evaluation of a net on a test set and its phase-swapped counterpart.
/// Per-class means are indexed by the amplitude donor's class.
#[derive(Clone, Copy, Debug)]
pub struct SwapEval {
    pub loss_orig: f64,
    pub loss_swapped: f64,
    /// Sign accuracy on the original test set.
    pub acc: f64,
    pub mean_label_orig: [f64; 2],
    pub mean_label_swapped: [f64; 2],
}

/// Metrics per epoch; epoch 0 is the untrained net.
#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub eval: SwapEval,
}

/// Full training record for one seed.
#[derive(Clone, Debug)]
pub struct TrainReport {
    pub seed: u64,
    pub hidden: usize,
    pub lr: f64,
    pub init_variance: (f64, f64),
    pub rows: Vec<EpochStats>,
}

fn split_by_class(patches: &[ImagePatch]) -> Result<[Vec<usize>; 2]> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, p) in patches.iter().enumerate() {
        match p.class_label {
            0 | 1 => by_class[p.class_label].push(i),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "binary training requires labels 0/1, found {other}"
                )))
            }
        }
    }
    for (label, idx) in by_class.iter().enumerate() {
        if idx.is_empty() {
            return Err(Error::EmptyClass { label });
        }
    }
    Ok(by_class)
}

/// Phase-swap a test set sample-wise between its two classes, pairing the
/// i-th patch of class 0 with the i-th of class 1 in encounter order. Swapped
/// patches keep the amplitude donor's label. Class counts must match.
fn build_swapped(test: &[&ImagePatch]) -> Result<Vec<ImagePatch>> {
    let mut class0 = Vec::new();
    let mut class1 = Vec::new();
    for p in test {
        match p.class_label {
            0 => class0.push(*p),
            1 => class1.push(*p),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "binary evaluation requires labels 0/1, found {other}"
                )))
            }
        }
    }
    if class0.is_empty() || class1.is_empty() {
        let label = usize::from(!class0.is_empty());
        return Err(Error::EmptyClass { label });
    }
    if class0.len() != class1.len() {
        let m = class0.len().min(class1.len());
        return Err(Error::PairingExhausted { index: m, len: m });
    }
    let mut swapped = Vec::with_capacity(test.len());
    for (a, b) in class0.iter().zip(&class1) {
        let (sa, sb) = phase_swap(a, b)?;
        swapped.push(sa);
        swapped.push(sb);
    }
    Ok(swapped)
}

fn eval_sets(net: &TwoLayerNet, orig: &[&ImagePatch], swapped: &[ImagePatch]) -> SwapEval {
    let mut loss_o = 0.0;
    let mut acc = 0.0;
    let mut sum_o = [0.0f64; 2];
    let mut cnt_o = [0usize; 2];
    for p in orig {
        let f = net.forward(p.pixels());
        let y = label_sign(p.class_label);
        loss_o += (f - y) * (f - y);
        if f * y > 0.0 {
            acc += 1.0;
        }
        sum_o[p.class_label] += f;
        cnt_o[p.class_label] += 1;
    }
    let mut loss_s = 0.0;
    let mut sum_s = [0.0f64; 2];
    let mut cnt_s = [0usize; 2];
    for p in swapped {
        let f = net.forward(p.pixels());
        let y = label_sign(p.class_label);
        loss_s += (f - y) * (f - y);
        sum_s[p.class_label] += f;
        cnt_s[p.class_label] += 1;
    }
    SwapEval {
        loss_orig: loss_o / orig.len() as f64,
        loss_swapped: loss_s / swapped.len() as f64,
        acc: acc / orig.len() as f64,
        mean_label_orig: [sum_o[0] / cnt_o[0] as f64, sum_o[1] / cnt_o[1] as f64],
        mean_label_swapped: [sum_s[0] / cnt_s[0] as f64, sum_s[1] / cnt_s[1] as f64],
    }
}

/// Evaluate a net on a test corpus and on its phase-swapped counterpart.
/// Requires equal class counts (the pairing is sample-wise between classes).
pub fn evaluate_swapped(net: &TwoLayerNet, test_corpus: &[ImagePatch]) -> Result<SwapEval> {
    let refs: Vec<&ImagePatch> = test_corpus.iter().collect();
    let swapped = build_swapped(&refs)?;
    Ok(eval_sets(net, &refs, &swapped))
}

/// Per-example SGD on MSE with an 80/20 stratified split. The report's row 0
/// is the untrained evaluation; row e follows epoch e. The swapped test set
/// is built once, so per-epoch curves are paired across epochs. Test classes
/// are truncated to a common size so original/swapped losses cover the same
/// examples.
pub fn train(
    net: &mut TwoLayerNet,
    corpus: &[ImagePatch],
    lr: f64,
    epochs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrainReport> {
    if lr < 0.0 {
        return Err(Error::InvalidArgument(format!("learning rate {lr} must be >= 0")));
    }
    let (h, w) = match corpus.first() {
        Some(p) => (p.height(), p.width()),
        None => return Err(Error::EmptyClass { label: 0 }),
    };
    if h * w != net.n {
        return Err(Error::DimensionMismatch { expected: net.n, got: h * w });
    }
    if let Some(bad) = corpus.iter().find(|p| p.height() != h || p.width() != w) {
        return Err(Error::DimensionMismatch { expected: h * w, got: bad.height() * bad.width() });
    }
    let mut by_class = split_by_class(corpus)?;
    for idx in &mut by_class {
        idx.shuffle(rng);
    }
    let n_test = by_class.iter().map(|idx| (idx.len() / 5).max(1)).min().unwrap();
    let mut test_idx = Vec::new();
    let mut train_idx = Vec::new();
    for idx in &by_class {
        if idx.len() <= n_test {
            return Err(Error::InvalidArgument(
                "class too small to hold out 20% and still train".into(),
            ));
        }
        test_idx.extend_from_slice(&idx[..n_test]);
        train_idx.extend_from_slice(&idx[n_test..]);
    }
    let test: Vec<&ImagePatch> = test_idx.iter().map(|&i| &corpus[i]).collect();
    let swapped = build_swapped(&test)?;

    let mut rows = Vec::with_capacity(epochs + 1);
    rows.push(EpochStats { epoch: 0, eval: eval_sets(net, &test, &swapped) });
    for epoch in 1..=epochs {
        train_idx.shuffle(rng);
        for &i in &train_idx {
            let p = &corpus[i];
            let grad = net.mse_gradient(p.pixels(), label_sign(p.class_label));
            net.apply(&grad, lr);
        }
        rows.push(EpochStats { epoch, eval: eval_sets(net, &test, &swapped) });
    }
    Ok(TrainReport {
        seed: 0,
        hidden: net.k,
        lr,
        init_variance: net.init_variance,
        rows,
    })
}

/// Init a fresh net and train it, all randomness drawn from one seeded
/// stream. The report records the seed.
pub fn train_textures(
    corpus: &[ImagePatch],
    hidden: usize,
    activation: Activation,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<TrainReport> {
    let (h, w) = corpus
        .first()
        .map(|p| (p.height(), p.width()))
        .ok_or(Error::EmptyClass { label: 0 })?;
    let mut rng = stream(seed, 0);
    let mut net = TwoLayerNet::init(hidden, h * w, activation, &mut rng)?;
    let mut report = train(&mut net, corpus, lr, epochs, &mut rng)?;
    report.seed = seed;
    Ok(report)
}

/// Train one net per seed, concurrently. Seeds are `seed_base..seed_base + n`.
pub fn train_many(
    corpus: &[ImagePatch],
    hidden: usize,
    activation: Activation,
    lr: f64,
    epochs: usize,
    seed_base: u64,
    n_seeds: usize,
) -> Result<Vec<TrainReport>> {
    (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| train_textures(corpus, hidden, activation, lr, epochs, seed_base + i))
        .collect()
}

/// CSV rows
/// `epoch,seed,loss_orig,loss_swapped,acc,mean_label_class0_orig,mean_label_class1_orig,mean_label_class0_swapped,mean_label_class1_swapped`.
pub fn write_train_csv(path: &Path, reports: &[TrainReport]) -> Result<()> {
    let mut out = String::from(
        "epoch,seed,loss_orig,loss_swapped,acc,mean_label_class0_orig,mean_label_class1_orig,\
         mean_label_class0_swapped,mean_label_class1_swapped\n",
    );
    for report in reports {
        for row in &report.rows {
            let e = &row.eval;
            out.push_str(&format!(
                "{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                row.epoch,
                report.seed,
                e.loss_orig,
                e.loss_swapped,
                e.acc,
                e.mean_label_orig[0],
                e.mean_label_orig[1],
                e.mean_label_swapped[0],
                e.mean_label_swapped[1],
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::t_statistic;
    use crate::surgery::{dft2, idft2};
    use num_complex::Complex64;
    use rand::Rng;

    fn random_x(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    /// Patch with exact Fourier amplitudes `profile(kx, ky)` and phases from
    /// a white-noise draw.
    fn field_with_profile(
        h: usize,
        w: usize,
        profile: &dyn Fn(f64, f64) -> f64,
        label: usize,
        seed: u64,
    ) -> ImagePatch {
        let mut rng = stream(seed, 3);
        let base = ImagePatch::new(h, w, random_x(h * w, &mut rng), label).unwrap();
        let mut spec = dft2(&base);
        let freq = |i: usize, n: usize| if 2 * i <= n { i as f64 } else { i as f64 - n as f64 };
        for p in 0..h {
            for q in 0..w {
                let a = profile(freq(p, h), freq(q, w));
                let r = spec[p][q].norm();
                spec[p][q] = if r == 0.0 { Complex64::new(a, 0.0) } else { spec[p][q] / r * a };
            }
        }
        let mut out = idft2(&spec).unwrap();
        out.class_label = label;
        out
    }

    #[test]
    fn forward_examples() {
        let mut rng = stream(1, 0);
        let mut net = TwoLayerNet::init(5, 16, Activation::LogCosh, &mut rng).unwrap();
        let x = random_x(16, &mut rng);

        net.w1.iter_mut().for_each(|w| *w = 0.0);
        net.w2.iter_mut().for_each(|w| *w = 0.0);
        net.b2 = 0.7;
        // zero weights: output is b2 exactly (logcosh(0) = 0 plays no role
        // since w2 = 0)
        assert_eq!(net.forward(&x), 0.7);

        // w2 = 0 kills any hidden activity
        net.w1.iter_mut().enumerate().for_each(|(i, w)| *w = (i % 7) as f64 - 3.0);
        net.b1.iter_mut().for_each(|b| *b = 0.3);
        assert_eq!(net.forward(&x), 0.7);
    }

    #[test]
    fn mse_gradient_matches_finite_differences() {
        let mut rng = stream(2, 0);
        let net = TwoLayerNet::init(4, 12, Activation::LogCosh, &mut rng).unwrap();
        let x = random_x(12, &mut rng);
        let y = 1.0;
        let grad = net.mse_gradient(&x, y);
        let loss = |net: &TwoLayerNet| {
            let f = net.forward(&x);
            (f - y) * (f - y)
        };
        let h = 1e-5;
        let check = |analytic: f64, fd: f64, what: &str| {
            assert!(
                (analytic - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                "{what}: analytic {analytic} vs fd {fd}"
            );
        };
        for i in 0..net.k * net.n {
            let mut plus = net.clone();
            plus.w1[i] += h;
            let mut minus = net.clone();
            minus.w1[i] -= h;
            check(grad.w1[i], (loss(&plus) - loss(&minus)) / (2.0 * h), "w1");
        }
        for i in 0..net.k {
            let mut plus = net.clone();
            plus.b1[i] += h;
            let mut minus = net.clone();
            minus.b1[i] -= h;
            check(grad.b1[i], (loss(&plus) - loss(&minus)) / (2.0 * h), "b1");
            let mut plus = net.clone();
            plus.w2[i] += h;
            let mut minus = net.clone();
            minus.w2[i] -= h;
            check(grad.w2[i], (loss(&plus) - loss(&minus)) / (2.0 * h), "w2");
        }
        let mut plus = net.clone();
        plus.b2 += h;
        let mut minus = net.clone();
        minus.b2 -= h;
        check(grad.b2, (loss(&plus) - loss(&minus)) / (2.0 * h), "b2");
    }

    /// Linearly separable sanity corpus: classes sit at opposite signs of one
    /// cosine pattern plus pixel noise.
    fn separable_corpus(per_class: usize, seed: u64) -> Vec<ImagePatch> {
        let (h, w) = (8usize, 8usize);
        let pattern: Vec<f64> = (0..h * w)
            .map(|idx| (std::f64::consts::TAU * (idx % w) as f64 / w as f64).cos())
            .collect();
        let mut rng = stream(seed, 4);
        let mut corpus = Vec::new();
        for label in 0..2 {
            let sign = label_sign(label);
            for _ in 0..per_class {
                let pixels: Vec<f64> = pattern
                    .iter()
                    .map(|&p| 0.8 * sign * p + rng.gen_range(-0.5..0.5))
                    .collect();
                corpus.push(ImagePatch::new(h, w, pixels, label).unwrap());
            }
        }
        corpus
    }

    #[test]
    fn train_reaches_high_accuracy_on_separable_corpus() {
        let corpus = separable_corpus(100, 10);
        let report =
            train_textures(&corpus, DEFAULT_HIDDEN, Activation::LogCosh, 1e-3, 50, 11).unwrap();
        let last = report.rows.last().unwrap();
        assert!(last.eval.acc > 0.95, "final accuracy {}", last.eval.acc);
        assert!(report.rows.iter().all(|r| (0.0..=1.0).contains(&r.eval.acc)));

        // training loss non-increasing on average over epochs
        let losses: Vec<f64> = report.rows.iter().map(|r| r.eval.loss_orig).collect();
        let head = losses[..3].iter().sum::<f64>() / 3.0;
        let tail = losses[losses.len() - 3..].iter().sum::<f64>() / 3.0;
        assert!(tail < head, "loss did not descend: head {head}, tail {tail}");

        // class means drift to their targets
        assert!(last.eval.mean_label_orig[0] > 0.5);
        assert!(last.eval.mean_label_orig[1] < -0.5);
    }

    #[test]
    fn train_trivial_examples() {
        let corpus = separable_corpus(10, 12);
        let mut rng = stream(13, 0);
        let mut net = TwoLayerNet::init(6, 64, Activation::LogCosh, &mut rng).unwrap();
        let before = net.clone();
        train(&mut net, &corpus, 0.0, 3, &mut rng).unwrap();
        assert_eq!(net.w1, before.w1);
        assert_eq!(net.b1, before.b1);
        assert_eq!(net.w2, before.w2);
        assert_eq!(net.b2, before.b2);

        // fixed seed: bit-identical reports
        let a = train_textures(&corpus, 6, Activation::LogCosh, 1e-3, 5, 42).unwrap();
        let b = train_textures(&corpus, 6, Activation::LogCosh, 1e-3, 5, 42).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.eval.loss_orig.to_bits(), rb.eval.loss_orig.to_bits());
            assert_eq!(ra.eval.loss_swapped.to_bits(), rb.eval.loss_swapped.to_bits());
        }
        let c = train_textures(&corpus, 6, Activation::LogCosh, 1e-3, 5, 43).unwrap();
        assert_ne!(
            a.rows.last().unwrap().eval.loss_orig.to_bits(),
            c.rows.last().unwrap().eval.loss_orig.to_bits()
        );
    }

    #[test]
    fn train_error_cases() {
        assert!(matches!(
            train_textures(&[], 4, Activation::LogCosh, 1e-3, 1, 0),
            Err(Error::EmptyClass { .. })
        ));
        let one_class: Vec<ImagePatch> =
            separable_corpus(10, 14).into_iter().filter(|p| p.class_label == 0).collect();
        assert!(matches!(
            train_textures(&one_class, 4, Activation::LogCosh, 1e-3, 1, 0),
            Err(Error::EmptyClass { label: 1 })
        ));
        let mut bad_label = separable_corpus(10, 15);
        bad_label[0].class_label = 2;
        assert!(train_textures(&bad_label, 4, Activation::LogCosh, 1e-3, 1, 0).is_err());

        let mut rng = stream(16, 0);
        let net = TwoLayerNet::init(4, 64, Activation::LogCosh, &mut rng).unwrap();
        let unequal = separable_corpus(3, 17);
        let mut test: Vec<ImagePatch> = unequal;
        test.remove(0);
        assert!(matches!(
            evaluate_swapped(&net, &test),
            Err(Error::PairingExhausted { .. })
        ));
    }

    #[test]
    fn untrained_net_sees_no_swap_gap() {
        let mut rng = stream(18, 0);
        let net = TwoLayerNet::init(DEFAULT_HIDDEN, 64, Activation::LogCosh, &mut rng).unwrap();
        let mut corpus = Vec::new();
        for label in 0..2 {
            for _ in 0..60 {
                let pixels = random_x(64, &mut rng);
                let mut p = ImagePatch::new(8, 8, pixels, label).unwrap();
                p.normalize(8.0).unwrap();
                corpus.push(p);
            }
        }
        let eval = evaluate_swapped(&net, &corpus).unwrap();
        let gap = (eval.loss_orig - eval.loss_swapped).abs();
        assert!(gap < 0.1 * eval.loss_orig, "untrained gap {gap} vs loss {}", eval.loss_orig);
    }

    /// Classes differing only in one mode's amplitude (identical phase
    /// statistics): the phase swap leaves amplitudes with their donors, so a
    /// trained amplitude classifier keeps working on swapped data.
    #[test]
    fn amplitude_discriminative_corpus_survives_swap() {
        let (h, w) = (8usize, 8usize);
        let make = |label: usize, seed: u64| -> ImagePatch {
            let strong = if label == 0 { 14.0 } else { 4.0 };
            field_with_profile(
                h,
                w,
                &move |kx: f64, ky: f64| {
                    if kx == 0.0 && ky == 0.0 {
                        0.0
                    } else if (kx.abs(), ky.abs()) == (0.0, 1.0) {
                        strong
                    } else {
                        2.0
                    }
                },
                label,
                seed,
            )
        };
        let corpus: Vec<ImagePatch> = (0..2)
            .flat_map(|label| (0..80).map(move |i| make(label, 100 + (label * 80 + i) as u64)))
            .collect();
        let report =
            train_textures(&corpus, DEFAULT_HIDDEN, Activation::LogCosh, 1e-3, 60, 19).unwrap();
        let last = report.rows.last().unwrap().eval;
        assert!(last.acc > 0.9, "amplitude classifier failed to train: acc {}", last.acc);
        let gap = last.loss_swapped - last.loss_orig;
        assert!(
            gap.abs() < 0.25 * last.loss_orig + 0.05,
            "swap should not hurt an amplitude classifier: orig {}, swapped {}",
            last.loss_orig,
            last.loss_swapped
        );
    }

    /// Classes sharing amplitudes but differing in phases: swapped loss blows
    /// up after training, and over seeds the gap starts at noise level and
    /// ends decisively positive.
    #[test]
    fn phase_discriminative_corpus_shows_swap_signature() {
        let (h, w) = (8usize, 8usize);
        // two fixed templates with identical power-law amplitude spectra and
        // independent phases
        let profile = |kx: f64, ky: f64| {
            let k = (kx * kx + ky * ky).sqrt();
            if k == 0.0 {
                0.0
            } else {
                8.0 / (1.0 + k)
            }
        };
        let template_a = field_with_profile(h, w, &profile, 0, 7001);
        let template_b = field_with_profile(h, w, &profile, 1, 7002);
        let mut rng = stream(20, 0);
        let mut corpus = Vec::new();
        for (label, tpl) in [(0usize, &template_a), (1usize, &template_b)] {
            for _ in 0..80 {
                let pixels: Vec<f64> =
                    tpl.pixels().iter().map(|&p| p + rng.gen_range(-0.3..0.3)).collect();
                corpus.push(ImagePatch::new(h, w, pixels, label).unwrap());
            }
        }

        let reports =
            train_many(&corpus, DEFAULT_HIDDEN, Activation::LogCosh, 1e-3, 40, 500, 8).unwrap();
        let gap_at = |pick: fn(&TrainReport) -> &EpochStats| -> Vec<f64> {
            reports
                .iter()
                .map(|r| {
                    let e = &pick(r).eval;
                    e.loss_swapped - e.loss_orig
                })
                .collect()
        };
        let initial = gap_at(|r| &r.rows[0]);
        let final_ = gap_at(|r| r.rows.last().unwrap());

        let t0 = t_statistic(&initial).unwrap();
        assert!(t0.abs() < 3.0, "untrained gap should be noise: t = {t0}");
        let t1 = t_statistic(&final_).unwrap();
        assert!(t1 > 3.0, "trained gap should be positive: t = {t1}");
        assert!(final_.iter().all(|&g| g > 0.0), "gaps {final_:?}");

        // the swapped set is classified as the phase donor: class-0 originals
        // carry class-1 phases after the swap, so their mean label goes
        // negative
        let last = reports[0].rows.last().unwrap().eval;
        assert!(last.acc > 0.9, "acc {}", last.acc);
        assert!(last.loss_swapped > 3.0 * last.loss_orig + 0.5);
        assert!(last.mean_label_swapped[0] < 0.0);
        assert!(last.mean_label_swapped[1] > 0.0);
    }

    #[test]
    fn train_csv_format() {
        let corpus = separable_corpus(10, 21);
        let reports: Vec<TrainReport> = (0..2)
            .map(|s| train_textures(&corpus, 4, Activation::LogCosh, 1e-3, 3, 60 + s).unwrap())
            .collect();
        let dir = std::env::temp_dir().join(format!("net_csv_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.csv");
        write_train_csv(&path, &reports).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split(',').count(), 9);
        assert!(lines[0].starts_with("epoch,seed,loss_orig"));
        assert_eq!(lines.len(), 1 + 2 * 4);
        for line in &lines[1..] {
            for field in line.split(',') {
                field.parse::<f64>().unwrap();
            }
        }
        fs::remove_dir_all(&dir).unwrap();
    }
}
