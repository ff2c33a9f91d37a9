//! Entropy statistics over the space of H/F coin sequences.
//!
//! Sequences are packed into integers (H = 1, first-applied coin in the least
//! significant bit). The sweep cuts the code range into fixed-size chunks,
//! reduces each chunk to a partial summary, and merges the partials in chunk
//! order. Chunking does not depend on the worker count, so reports are
//! bit-identical however many threads run.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coin::{fourier_coin, hadamard_coin, Complex2x2, Spinor, C64};
use crate::entanglement::{entanglement_entropy, von_neumann_entropy, DensityMatrix2};
use crate::error::{Error, Result};
use crate::lz::lz_complexity_bits;
use crate::sequence::CoinSequence;
use crate::walk::{final_state, CoinPolicy, InitialCoin};

/// Largest `n` for which all `2^n` sequences are enumerated.
pub const MAX_EXHAUSTIVE_LEN: usize = 24;
/// Two sequences whose entropies differ by at most this are tied.
pub const TIE_TOL: f64 = 1e-12;
const CHUNK: u64 = 1 << 12;

/// Final coin-position entropy of the walk driven by `seq`.
pub fn entropy_of_sequence(init: &InitialCoin, seq: &CoinSequence) -> Result<f64> {
    let state = final_state(init, &CoinPolicy::DynamicSequence(seq.clone()), seq.len())?;
    entanglement_entropy(&state)
}

/// Allocation-free walker for packed sequences of a fixed maximum length.
///
/// `|↑⟩` and `|↓⟩` amplitudes live in separate buffers whose origins drift
/// by one slot per step in opposite directions, which realises the shift
/// without moving any data.
pub struct PackedWalker {
    max_len: usize,
    up: Vec<C64>,
    down: Vec<C64>,
    coins: [Complex2x2; 2],
}

impl PackedWalker {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            up: vec![C64::new(0.0, 0.0); 3 * max_len + 1],
            down: vec![C64::new(0.0, 0.0); 3 * max_len + 1],
            coins: [fourier_coin(), hadamard_coin()],
        }
    }

    /// Entropy after applying the `n` coins packed in `code`.
    pub fn final_entropy(&mut self, init: Spinor, code: u64, n: usize) -> f64 {
        assert!(n <= self.max_len, "sequence longer than the walker buffer");
        let m = self.max_len as i64;
        // site j lives at up[j + up_origin] and down[j + down_origin]
        let mut up_origin = 2 * m;
        let mut down_origin = m;
        self.up[(up_origin) as usize] = init[0];
        self.down[(down_origin) as usize] = init[1];
        for t in 0..n as i64 {
            let c = &self.coins[(code >> t & 1) as usize].0;
            let mut j = -t;
            while j <= t {
                let ui = (j + up_origin) as usize;
                let di = (j + down_origin) as usize;
                let (a, b) = (self.up[ui], self.down[di]);
                self.up[ui] = c[0][0] * a + c[0][1] * b;
                self.down[di] = c[1][0] * a + c[1][1] * b;
                j += 2;
            }
            // the shift is folded into the origins
            up_origin -= 1;
            down_origin += 1;
            // slots newly exposed at the edges of the next step's range
            self.up[(-t - 1 + up_origin) as usize] = C64::new(0.0, 0.0);
            self.down[(t + 1 + down_origin) as usize] = C64::new(0.0, 0.0);
        }
        let t = n as i64;
        let (mut p00, mut p11, mut c01) = (0.0, 0.0, C64::new(0.0, 0.0));
        let mut j = -t;
        while j <= t {
            let a = self.up[(j + up_origin) as usize];
            let b = self.down[(j + down_origin) as usize];
            p00 += a.norm_sqr();
            p11 += b.norm_sqr();
            c01 += a * b.conj();
            j += 2;
        }
        let norm = p00 + p11;
        von_neumann_entropy(&DensityMatrix2::from_parts(p00 / norm, p11 / norm, c01 / norm))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Monotone edges, at least two. Values outside the edges are counted in
    /// the first or last bin.
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidBins("need at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBins("edges must be finite and strictly increasing".into()));
        }
        let counts = vec![0; edges.len() - 1];
        Ok(Self { edges, counts })
    }

    /// `bins` equal-width bins on `[0, 1]`.
    pub fn uniform_unit(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidBins("zero bins".into()));
        }
        Self::new((0..=bins).map(|k| k as f64 / bins as f64).collect())
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let k = self.edges.partition_point(|&e| e <= x);
        k.saturating_sub(1).min(self.counts.len() - 1)
    }

    fn add(&mut self, x: f64) {
        let k = self.bin_of(x);
        self.counts[k] += 1;
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fraction of the total in each bin.
    pub fn rates(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub histogram: Histogram,
    /// `fraction_above` counts entropies strictly greater than this.
    pub threshold: f64,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Keep every `(code, entropy)` pair for ranking queries.
    pub keep_entropies: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            histogram: Histogram::uniform_unit(12).expect("12 bins"),
            threshold: 0.9,
            workers: None,
            keep_entropies: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SequenceEntropy {
    pub code: u64,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub init: InitialCoin,
    pub mode: SweepMode,
    pub count: u64,
    pub mean_entropy: f64,
    /// Population standard deviation.
    pub std_entropy: f64,
    /// `std / √count`.
    pub standard_error: f64,
    pub threshold: f64,
    pub above_threshold: u64,
    pub fraction_above: f64,
    pub histogram: Histogram,
    pub max_entropy: f64,
    /// Sequences within `1e-12` of the maximum, in text order.
    pub argmax: Vec<CoinSequence>,
    pub min_entropy: f64,
    pub argmin: Vec<CoinSequence>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub entropies: Option<Vec<SequenceEntropy>>,
}

impl SweepReport {
    pub fn entropy_of_code(&self, code: u64) -> Option<f64> {
        let all = self.entropies.as_ref()?;
        match self.mode {
            SweepMode::Exhaustive => all.get(code as usize).map(|e| e.entropy),
            SweepMode::Sampled { .. } => all.iter().find(|e| e.code == code).map(|e| e.entropy),
        }
    }
}

/// Mergeable summary of a contiguous chunk of sequences.
#[derive(Clone, Debug)]
struct Partial {
    count: u64,
    mean: f64,
    m2: f64,
    above: u64,
    histogram: Histogram,
    max: f64,
    argmax: Vec<SequenceEntropy>,
    min: f64,
    argmin: Vec<SequenceEntropy>,
}

impl Partial {
    fn empty(histogram: &Histogram) -> Self {
        let mut histogram = histogram.clone();
        histogram.counts.iter_mut().for_each(|c| *c = 0);
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            above: 0,
            histogram,
            max: f64::NEG_INFINITY,
            argmax: Vec::new(),
            min: f64::INFINITY,
            argmin: Vec::new(),
        }
    }

    fn push(&mut self, item: SequenceEntropy, threshold: f64) {
        let x = item.entropy;
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        if x > threshold {
            self.above += 1;
        }
        self.histogram.add(x);
        if x > self.max {
            self.max = x;
            self.argmax.retain(|e| e.entropy >= x - TIE_TOL);
        }
        if x >= self.max - TIE_TOL {
            self.argmax.push(item);
        }
        if x < self.min {
            self.min = x;
            self.argmin.retain(|e| e.entropy <= x + TIE_TOL);
        }
        if x <= self.min + TIE_TOL {
            self.argmin.push(item);
        }
    }

    /// Chan et al. pairwise update; `other` follows `self` in code order.
    fn merge(mut self, other: Partial) -> Partial {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
        self.above += other.above;
        self.histogram.merge(&other.histogram);
        self.max = self.max.max(other.max);
        let max = self.max;
        self.argmax.extend(other.argmax);
        self.argmax.retain(|e| e.entropy >= max - TIE_TOL);
        self.min = self.min.min(other.min);
        let min = self.min;
        self.argmin.extend(other.argmin);
        self.argmin.retain(|e| e.entropy <= min + TIE_TOL);
        self
    }
}

fn run_in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::InvalidArgument("worker count must be positive".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Evaluates chunk `k` given a generator of the codes in it.
fn sweep_chunks(
    init: &InitialCoin,
    n: usize,
    chunks: u64,
    options: &SweepOptions,
    codes_of_chunk: impl Fn(u64) -> Vec<u64> + Sync,
) -> Result<(Partial, Option<Vec<SequenceEntropy>>)> {
    let spinor = init.spinor();
    let parts = run_in_pool(options.workers, || {
        (0..chunks)
            .into_par_iter()
            .map_init(
                || PackedWalker::new(n),
                |walker, k| {
                    let mut partial = Partial::empty(&options.histogram);
                    let mut kept = Vec::new();
                    for code in codes_of_chunk(k) {
                        let item = SequenceEntropy {
                            code,
                            entropy: walker.final_entropy(spinor, code, n),
                        };
                        partial.push(item, options.threshold);
                        if options.keep_entropies {
                            kept.push(item);
                        }
                    }
                    (partial, kept)
                },
            )
            .collect::<Vec<_>>()
    })?;
    let mut total = Partial::empty(&options.histogram);
    let mut entropies = options.keep_entropies.then(Vec::new);
    for (partial, kept) in parts {
        total = total.merge(partial);
        if let Some(all) = entropies.as_mut() {
            all.extend(kept);
        }
    }
    Ok((total, entropies))
}

fn finish(
    init: &InitialCoin,
    n: usize,
    mode: SweepMode,
    options: &SweepOptions,
    partial: Partial,
    entropies: Option<Vec<SequenceEntropy>>,
    started: Instant,
) -> Result<SweepReport> {
    let to_sequences = |items: &[SequenceEntropy]| -> Result<Vec<CoinSequence>> {
        let mut seqs = items
            .iter()
            .map(|e| CoinSequence::from_code(e.code, n))
            .collect::<Result<Vec<_>>>()?;
        seqs.sort();
        seqs.dedup();
        Ok(seqs)
    };
    let count = partial.count;
    let std = (partial.m2 / count as f64).max(0.0).sqrt();
    Ok(SweepReport {
        n,
        init: *init,
        mode,
        count,
        mean_entropy: partial.mean,
        std_entropy: std,
        standard_error: std / (count as f64).sqrt(),
        threshold: options.threshold,
        above_threshold: partial.above,
        fraction_above: partial.above as f64 / count as f64,
        argmax: to_sequences(&partial.argmax)?,
        argmin: to_sequences(&partial.argmin)?,
        histogram: partial.histogram,
        max_entropy: partial.max,
        min_entropy: partial.min,
        wall_time_s: started.elapsed().as_secs_f64(),
        entropies,
    })
}

/// Final entropies of all `2^n` sequences of length `n`.
pub fn exhaustive_sweep(init: &InitialCoin, n: usize, options: &SweepOptions) -> Result<SweepReport> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if n > MAX_EXHAUSTIVE_LEN {
        return Err(Error::SweepTooLarge {
            n,
            max: MAX_EXHAUSTIVE_LEN,
        });
    }
    let started = Instant::now();
    let total = 1u64 << n;
    let chunks = total.div_ceil(CHUNK);
    let (partial, entropies) = sweep_chunks(init, n, chunks, options, |k| {
        (k * CHUNK..((k + 1) * CHUNK).min(total)).collect()
    })?;
    finish(init, n, SweepMode::Exhaustive, options, partial, entropies, started)
}

/// `samples` sequences drawn uniformly with replacement. Chunk `k` draws
/// from ChaCha8 stream `k` of `seed`, so the draws do not depend on threads.
pub fn sampled_sweep(
    init: &InitialCoin,
    n: usize,
    samples: u64,
    seed: u64,
    options: &SweepOptions,
) -> Result<SweepReport> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if n > CoinSequence::MAX_PACKED_LEN {
        return Err(Error::SequenceTooLong {
            n,
            max: CoinSequence::MAX_PACKED_LEN,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let started = Instant::now();
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let chunks = samples.div_ceil(CHUNK);
    let (partial, entropies) = sweep_chunks(init, n, chunks, options, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        let len = CHUNK.min(samples - k * CHUNK);
        (0..len).map(|_| rng.random::<u64>() & mask).collect()
    })?;
    finish(
        init,
        n,
        SweepMode::Sampled { samples, seed },
        options,
        partial,
        entropies,
        started,
    )
}

/// Text-order key of a packed sequence: the first symbol is the most
/// significant position, `F < H`.
fn text_key(code: u64, n: usize) -> u64 {
    code.reverse_bits() >> (64 - n)
}

/// The `k` highest-entropy sequences, ties (within `1e-12`) in text order.
pub fn best_sequences(report: &SweepReport, k: usize) -> Result<Vec<CoinSequence>> {
    let all = report.entropies.as_ref().ok_or(Error::NoEntropies)?;
    if k > all.len() {
        return Err(Error::TooManyRequested {
            k,
            count: all.len(),
        });
    }
    let mut ranked: Vec<(i64, u64, u64)> = all
        .iter()
        .map(|e| {
            let bucket = -(e.entropy / TIE_TOL).round() as i64;
            (bucket, text_key(e.code, report.n), e.code)
        })
        .collect();
    let cmp = |a: &(i64, u64, u64), b: &(i64, u64, u64)| (a.0, a.1).cmp(&(b.0, b.1));
    if k < ranked.len() && k > 0 {
        ranked.select_nth_unstable_by(k - 1, cmp);
        ranked.truncate(k);
    }
    ranked.sort_by(cmp);
    ranked
        .into_iter()
        .take(k)
        .map(|(_, _, code)| CoinSequence::from_code(code, report.n))
        .collect()
}

/// Share of all swept sequences that fall in the histogram bin containing
/// `entropy`.
pub fn interval_rate(report: &SweepReport, entropy: f64) -> f64 {
    let h = &report.histogram;
    h.counts[h.bin_of(entropy)] as f64 / h.total().max(1) as f64
}

/// `Σ_i S_i · P_i / per_interval` over measured sequences, where `P_i` is the
/// rate of the entropy interval sequence `i` belongs to and `per_interval`
/// sequences were measured in each interval.
pub fn interval_weighted_mean(measurements: &[(f64, f64)], per_interval: usize) -> Result<f64> {
    if per_interval == 0 {
        return Err(Error::InvalidArgument("per_interval must be positive".into()));
    }
    Ok(measurements.iter().map(|(s, p)| s * p).sum::<f64>() / per_interval as f64)
}

/// Spearman rank correlation between LZ complexity and final entropy over
/// every sequence retained in the report.
pub fn complexity_entropy_correlation(report: &SweepReport) -> Result<f64> {
    let all = report.entropies.as_ref().ok_or(Error::NoEntropies)?;
    let n = report.n;
    let complexities: Vec<f64> = all
        .par_iter()
        .map(|e| {
            let bits: Vec<u8> = (0..n).map(|k| (e.code >> k & 1) as u8).collect();
            lz_complexity_bits(&bits) as f64
        })
        .collect();
    let entropies: Vec<f64> = all.iter().map(|e| e.entropy).collect();
    Ok(pearson(&average_ranks(&complexities), &average_ranks(&entropies)))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end - 1) as f64 / 2.0 + 1.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}
