//! Walker state and the coin-then-shift dynamics `U(t) = S·(C(t) ⊗ I_P)`.
//!
//! A state after `t` steps is stored densely over sites `j ∈ [−t, t]` at array
//! offset `j + t`. Sites of the wrong parity are kept (as zeros) so the layout
//! is the same for every policy.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coin::{fourier_coin, hadamard_coin, Complex2x2, Spinor, C64};
use crate::error::{Error, Result};
use crate::sequence::{CoinSequence, Symbol};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Initial coin state `cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩` at the origin, angles
/// in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCoin {
    theta_deg: f64,
    phi_deg: f64,
}

impl InitialCoin {
    /// `theta_deg ∈ [0, 180]`, `phi_deg ∈ [0, 360)`.
    pub fn new(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        if !(0.0..=180.0).contains(&theta_deg) {
            return Err(Error::AngleOutOfRange {
                name: "theta",
                value: theta_deg,
                range: "[0, 180] degrees",
            });
        }
        if !(0.0..360.0).contains(&phi_deg) {
            return Err(Error::AngleOutOfRange {
                name: "phi",
                value: phi_deg,
                range: "[0, 360) degrees",
            });
        }
        Ok(Self { theta_deg, phi_deg })
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta_deg
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi_deg
    }

    pub fn spinor(&self) -> Spinor {
        let half = self.theta_deg.to_radians() / 2.0;
        [
            Complex::new(half.cos(), 0.0),
            Complex::from_polar(half.sin(), self.phi_deg.to_radians()),
        ]
    }
}

/// Pure state `Σ_j [a(j,t)|↑⟩ + b(j,t)|↓⟩] ⊗ |j⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    t: usize,
    amps: Vec<Spinor>,
}

impl WalkState {
    /// Walker localized at the origin with the given coin spinor.
    pub fn localized(spinor: Spinor) -> Self {
        Self {
            t: 0,
            amps: vec![spinor],
        }
    }

    pub fn initial(init: &InitialCoin) -> Self {
        Self::localized(init.spinor())
    }

    /// Builds a state from amplitudes for sites `−t..=t` in ascending order.
    pub fn from_amplitudes(t: usize, amps: Vec<Spinor>) -> Result<Self> {
        if amps.len() != 2 * t + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} sites for t = {t}, got {}",
                2 * t + 1,
                amps.len()
            )));
        }
        Ok(Self { t, amps })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn min_site(&self) -> i64 {
        -(self.t as i64)
    }

    pub fn max_site(&self) -> i64 {
        self.t as i64
    }

    /// Amplitudes in ascending site order, starting at `min_site()`.
    pub fn amplitudes(&self) -> &[Spinor] {
        &self.amps
    }

    /// Spinor at site `j`; zero outside the stored range.
    pub fn spinor(&self, j: i64) -> Spinor {
        let offset = j + self.t as i64;
        if offset < 0 || offset as usize >= self.amps.len() {
            [ZERO, ZERO]
        } else {
            self.amps[offset as usize]
        }
    }

    /// `(j, spinor)` for every stored site in ascending order.
    pub fn sites(&self) -> impl Iterator<Item = (i64, &Spinor)> + '_ {
        let lo = self.min_site();
        self.amps.iter().enumerate().map(move |(k, s)| (lo + k as i64, s))
    }

    pub fn site_probability(&self, j: i64) -> f64 {
        let s = self.spinor(j);
        s[0].norm_sqr() + s[1].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr())
            .sum()
    }

    /// Applies the conditional shift `S`: `|↑⟩` components move to `j + 1`,
    /// `|↓⟩` components to `j − 1`. The clock advances by one since the
    /// support grows by one site on each side.
    pub fn shift(&self) -> WalkState {
        let t = self.t + 1;
        let mut amps = vec![[ZERO, ZERO]; 2 * t + 1];
        // old offset k (site k - t_old) -> new offsets k+2 (up) and k (down)
        for (k, s) in self.amps.iter().enumerate() {
            amps[k + 2][0] = s[0];
            amps[k][1] = s[1];
        }
        WalkState { t, amps }
    }

    /// One step `S·(C ⊗ I_P)` with a site-independent coin.
    pub fn step(&self, coin: &Complex2x2) -> Result<WalkState> {
        coin.ensure_unitary()?;
        Ok(self.step_unchecked(|_| coin))
    }

    /// One step with a coin chosen per site. Coins are assumed unitary.
    pub fn step_sitewise<'c>(&self, coin_at: impl Fn(i64) -> &'c Complex2x2) -> WalkState {
        self.step_unchecked(coin_at)
    }

    fn step_unchecked<'c>(&self, coin_at: impl Fn(i64) -> &'c Complex2x2) -> WalkState {
        let t = self.t + 1;
        let lo = self.min_site();
        let mut amps = vec![[ZERO, ZERO]; 2 * t + 1];
        for (k, s) in self.amps.iter().enumerate() {
            if s[0] == ZERO && s[1] == ZERO {
                continue;
            }
            let out = coin_at(lo + k as i64).apply(s);
            amps[k + 2][0] = out[0];
            amps[k][1] = out[1];
        }
        WalkState { t, amps }
    }
}

/// How the coin is chosen at each step (and, for static disorder, each site).
#[derive(Clone, Debug, PartialEq)]
pub enum CoinPolicy {
    /// Same coin at every step and site.
    Ordered(Complex2x2),
    /// Explicit H/F sequence, first symbol applied at step 1.
    DynamicSequence(CoinSequence),
    /// Fresh uniform draw from the alphabet at every step.
    DynamicRandom {
        alphabet: [Complex2x2; 2],
        seed: u64,
    },
    /// One uniform draw per site in `[−steps, steps]`, fixed in time.
    StaticRandom {
        alphabet: [Complex2x2; 2],
        seed: u64,
    },
    /// Coin at `(j, t)` is `alphabet[s(j) XOR d(t)]`, with `s` drawn as in
    /// `StaticRandom` and `d` as in `DynamicRandom`.
    StaticAndDynamic {
        alphabet: [Complex2x2; 2],
        static_seed: u64,
        dynamic_seed: u64,
    },
}

impl CoinPolicy {
    pub fn hadamard() -> Self {
        CoinPolicy::Ordered(hadamard_coin())
    }

    /// The `{F, H}` alphabet, indexed so that bit 1 selects H.
    pub fn hf_alphabet() -> [Complex2x2; 2] {
        [fourier_coin(), hadamard_coin()]
    }

    /// Fixes every random choice for a walk of `steps` steps.
    pub fn resolve(&self, steps: usize) -> Result<CoinSchedule> {
        if steps == 0 {
            return Err(Error::NoSteps);
        }
        let schedule = match self {
            CoinPolicy::Ordered(coin) => {
                coin.ensure_unitary()?;
                CoinSchedule::Temporal(vec![*coin; steps])
            }
            CoinPolicy::DynamicSequence(seq) => {
                if seq.len() != steps {
                    return Err(Error::SequenceLength {
                        expected: steps,
                        actual: seq.len(),
                    });
                }
                CoinSchedule::Temporal(seq.symbols().iter().map(Symbol::coin).collect())
            }
            CoinPolicy::DynamicRandom { alphabet, seed } => {
                check_alphabet(alphabet)?;
                let bits = random_bits(*seed, steps);
                CoinSchedule::Temporal(bits.iter().map(|&b| alphabet[b as usize]).collect())
            }
            CoinPolicy::StaticRandom { alphabet, seed } => {
                check_alphabet(alphabet)?;
                CoinSchedule::Sitewise {
                    alphabet: *alphabet,
                    radius: steps,
                    site_bits: random_bits(*seed, 2 * steps + 1),
                    step_bits: None,
                }
            }
            CoinPolicy::StaticAndDynamic {
                alphabet,
                static_seed,
                dynamic_seed,
            } => {
                check_alphabet(alphabet)?;
                CoinSchedule::Sitewise {
                    alphabet: *alphabet,
                    radius: steps,
                    site_bits: random_bits(*static_seed, 2 * steps + 1),
                    step_bits: Some(random_bits(*dynamic_seed, steps)),
                }
            }
        };
        Ok(schedule)
    }
}

fn check_alphabet(alphabet: &[Complex2x2; 2]) -> Result<()> {
    for coin in alphabet {
        coin.ensure_unitary()?;
    }
    Ok(())
}

/// Uniform i.i.d. bits from ChaCha8 seeded with `seed`.
pub fn random_bits(seed: u64, count: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random::<bool>()).collect()
}

/// Every coin of a walk, with randomness already drawn.
#[derive(Clone, Debug, PartialEq)]
pub enum CoinSchedule {
    /// `coins[k]` is applied at step `k + 1` on every site.
    Temporal(Vec<Complex2x2>),
    Sitewise {
        alphabet: [Complex2x2; 2],
        radius: usize,
        site_bits: Vec<bool>,
        step_bits: Option<Vec<bool>>,
    },
}

impl CoinSchedule {
    /// Coin applied at site `j` during step `step` (0-based). Sites outside
    /// the drawn static range (which never carry amplitude) read a zero
    /// static bit.
    pub fn coin_at(&self, step: usize, j: i64) -> &Complex2x2 {
        match self {
            CoinSchedule::Temporal(coins) => &coins[step],
            CoinSchedule::Sitewise {
                alphabet,
                radius,
                site_bits,
                step_bits,
            } => {
                let offset = j + *radius as i64;
                let mut bit = usize::try_from(offset)
                    .ok()
                    .and_then(|k| site_bits.get(k).copied())
                    .unwrap_or(false);
                if let Some(steps) = step_bits {
                    bit ^= steps[step];
                }
                &alphabet[bit as usize]
            }
        }
    }

    fn advance(&self, state: &WalkState) -> WalkState {
        let step = state.t();
        match self {
            CoinSchedule::Temporal(coins) => state.step_unchecked(|_| &coins[step]),
            CoinSchedule::Sitewise { .. } => state.step_unchecked(|j| self.coin_at(step, j)),
        }
    }
}

/// Lazily produced trajectory: yields the states at `t = 0, 1, …, steps`.
pub struct Evolution {
    schedule: CoinSchedule,
    steps: usize,
    next: Option<WalkState>,
}

impl Iterator for Evolution {
    type Item = WalkState;

    fn next(&mut self) -> Option<WalkState> {
        let current = self.next.take()?;
        if current.t() < self.steps {
            self.next = Some(self.schedule.advance(&current));
        }
        Some(current)
    }
}

/// Streams the trajectory of an `steps`-step walk.
pub fn evolution(init: &InitialCoin, policy: &CoinPolicy, steps: usize) -> Result<Evolution> {
    Ok(Evolution {
        schedule: policy.resolve(steps)?,
        steps,
        next: Some(WalkState::initial(init)),
    })
}

/// Full trajectory; `result[k]` is the state after `k` steps.
///
/// An n-step walk is exactly n applications of `U(t)`, so the returned vector
/// has `steps + 1` entries including the initial state.
pub fn evolve(init: &InitialCoin, policy: &CoinPolicy, steps: usize) -> Result<Vec<WalkState>> {
    Ok(evolution(init, policy, steps)?.collect())
}

/// State after `steps` steps without keeping the trajectory.
pub fn final_state(init: &InitialCoin, policy: &CoinPolicy, steps: usize) -> Result<WalkState> {
    let last = evolution(init, policy, steps)?.last();
    Ok(last.expect("evolution always yields the initial state"))
}
