//! Per-slot request generation.
//!
//! Each provider owns a catalog whose object popularity follows a Zipf law. A
//! request picks a provider by its request share, is uncacheable with
//! probability `1 - cacheability`, and otherwise names an object by popularity
//! rank. Ranks double as object identities: only the comparison between a rank
//! and the provider's slot count matters downstream.

use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Static description of one service provider's traffic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpProfile<T> {
    /// Number of distinct cacheable objects.
    pub catalog_size: usize,
    pub zipf_exponent: T,
    /// Probability that a request targets a cacheable object.
    pub cacheability: T,
    /// Fraction of all requests directed to this provider.
    pub request_share: T,
}

impl<T: Real> SpProfile<T> {
    pub fn new(catalog_size: usize, zipf_exponent: T, cacheability: T, request_share: T) -> Self {
        Self {
            catalog_size,
            zipf_exponent,
            cacheability,
            request_share,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        if self.catalog_size == 0 {
            return Err(Error::InvalidCatalog("catalog size must be at least 1".into()));
        }
        if !(self.zipf_exponent >= T::zero()) || !self.zipf_exponent.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "zipf exponent {} must be a finite non-negative number",
                self.zipf_exponent
            )));
        }
        if !unit(self.cacheability) {
            return Err(Error::InvalidProfile(format!(
                "cacheability {} outside [0, 1]",
                self.cacheability
            )));
        }
        if !unit(self.request_share) {
            return Err(Error::InvalidProfile(format!(
                "request share {} outside [0, 1]",
                self.request_share
            )));
        }
        Ok(())
    }

    /// Share of the total request stream that is cacheable and aimed at this provider.
    pub fn cacheable_share(&self) -> T {
        self.request_share * self.cacheability
    }
}

/// Checks every profile and that the request shares sum to one.
pub fn validate_profiles<T: Real>(profiles: &[SpProfile<T>]) -> Result<()> {
    if profiles.is_empty() {
        return Err(Error::InvalidProfile("at least one provider is required".into()));
    }
    for (p, profile) in profiles.iter().enumerate() {
        profile.validate().map_err(|e| match e {
            Error::InvalidProfile(msg) => Error::InvalidProfile(format!("provider {}: {msg}", p + 1)),
            Error::InvalidCatalog(msg) => Error::InvalidCatalog(format!("provider {}: {msg}", p + 1)),
            other => other,
        })?;
    }
    let total: CompensatedSum<T> = profiles.iter().map(|p| p.request_share).collect();
    let tolerance = T::of(1e-12).max(T::epsilon() * T::of_usize(4 * profiles.len()));
    if (total.value() - T::one()).abs() > tolerance {
        return Err(Error::InvalidProfile(format!(
            "request shares sum to {}, expected 1",
            total.value()
        )));
    }
    Ok(())
}

/// Zipf popularity `rho_i = i^-beta / sum_j j^-beta` for ranks `1..=n`.
pub fn zipf_popularity<T: Real>(n: usize, beta: T) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidCatalog("catalog size must be at least 1".into()));
    }
    let weights: Vec<T> = (1..=n).map(|i| T::of_usize(i).powf(-beta)).collect();
    let norm: CompensatedSum<T> = weights.iter().copied().collect();
    let norm = norm.value();
    Ok(weights.into_iter().map(|w| w / norm).collect())
}

/// Probability mass of the `m` most popular objects.
///
/// Plain left-to-right summation, so exact scalar types (rationals) give exact
/// results.
pub fn head_mass<T>(rho: &[T], m: usize) -> Result<T>
where
    T: Zero + Copy,
{
    if m > rho.len() {
        return Err(Error::OutOfRange {
            index: m,
            max: rho.len(),
        });
    }
    Ok(rho[..m].iter().fold(T::zero(), |acc, &x| acc + x))
}

/// Precomputed popularity CDF of one catalog.
///
/// Holds one scalar per object; at `N = 10^7` in `f64` that is 80 MB per
/// provider.
#[derive(Clone, Debug)]
pub struct ZipfCatalog<T> {
    exponent: T,
    norm: T,
    cdf: Vec<T>,
}

impl<T: Real> ZipfCatalog<T> {
    pub fn new(n: usize, beta: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCatalog("catalog size must be at least 1".into()));
        }
        let norm: CompensatedSum<T> = (1..=n).map(|i| T::of_usize(i).powf(-beta)).collect();
        let norm = norm.value();
        let mut cdf = Vec::with_capacity(n);
        let mut running = CompensatedSum::new();
        for i in 1..=n {
            running.add(T::of_usize(i).powf(-beta));
            cdf.push((running.value() / norm).min(T::one()));
        }
        cdf[n - 1] = T::one();
        Ok(Self {
            exponent: beta,
            norm,
            cdf,
        })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    /// Popularity of the object at 1-based `rank`; zero outside the catalog.
    pub fn probability(&self, rank: u64) -> T {
        if rank == 0 || rank > self.cdf.len() as u64 {
            return T::zero();
        }
        T::of_u64(rank).powf(-self.exponent) / self.norm
    }

    /// Mass of the `m` most popular objects, saturating at the full catalog.
    pub fn head_mass(&self, m: u64) -> T {
        match m {
            0 => T::zero(),
            m if m >= self.cdf.len() as u64 => T::one(),
            m => self.cdf[(m - 1) as usize],
        }
    }

    /// Inverts the CDF: smallest rank whose cumulative mass exceeds `u`.
    pub fn rank_for(&self, u: T) -> u64 {
        let idx = self.cdf.partition_point(|&c| c <= u);
        (idx.min(self.cdf.len() - 1) + 1) as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RequestKind {
    /// Cacheable object identified by its 1-based popularity rank.
    Cacheable { rank: u64 },
    Uncacheable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RequestEvent {
    /// 0-based provider index.
    pub sp: usize,
    pub kind: RequestKind,
}

/// All arrivals of one time slot, in arrival order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RequestBatch {
    pub slot: u64,
    pub events: Vec<RequestEvent>,
}

impl RequestBatch {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalMode {
    /// Exactly `round(lambda * tau)` requests per slot.
    Fixed,
    /// `Poisson(lambda * tau)` requests per slot.
    #[default]
    Poisson,
}

/// Request generator for a set of providers.
#[derive(Clone, Debug)]
pub struct Workload<T> {
    profiles: Vec<SpProfile<T>>,
    catalogs: Vec<ZipfCatalog<T>>,
    share_cdf: Vec<T>,
}

impl<T: Real> Workload<T> {
    pub fn new(profiles: Vec<SpProfile<T>>) -> Result<Self> {
        validate_profiles(&profiles)?;
        let catalogs = profiles
            .iter()
            .map(|p| ZipfCatalog::new(p.catalog_size, p.zipf_exponent))
            .collect::<Result<Vec<_>>>()?;
        let mut share_cdf = Vec::with_capacity(profiles.len());
        let mut acc = CompensatedSum::new();
        for p in &profiles {
            acc.add(p.request_share);
            share_cdf.push(acc.value().min(T::one()));
        }
        // Route any rounding slack to the last provider with a positive share.
        if let Some(last) = profiles.iter().rposition(|p| p.request_share > T::zero()) {
            for c in &mut share_cdf[last..] {
                *c = T::one();
            }
        }
        Ok(Self {
            profiles,
            catalogs,
            share_cdf,
        })
    }

    pub fn profiles(&self) -> &[SpProfile<T>] {
        &self.profiles
    }

    pub fn catalogs(&self) -> &[ZipfCatalog<T>] {
        &self.catalogs
    }

    pub fn num_sps(&self) -> usize {
        self.profiles.len()
    }

    /// Draws one request using exactly three uniform variates, in this order:
    /// provider, cacheability, rank. The rank variate is consumed even for
    /// uncacheable requests so that every request advances the generator equally.
    pub fn draw_request<R: Rng + ?Sized>(&self, rng: &mut R) -> RequestEvent {
        let u_sp = T::sample_unit(rng);
        let u_cache = T::sample_unit(rng);
        let u_rank = T::sample_unit(rng);

        let sp = self
            .share_cdf
            .partition_point(|&c| c <= u_sp)
            .min(self.profiles.len() - 1);
        let kind = if u_cache < self.profiles[sp].cacheability {
            RequestKind::Cacheable {
                rank: self.catalogs[sp].rank_for(u_rank),
            }
        } else {
            RequestKind::Uncacheable
        };
        RequestEvent { sp, kind }
    }

    /// Draws the arrivals of one slot of length `tau` seconds at `lambda` req/s.
    pub fn draw_slot<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        slot: u64,
        lambda: f64,
        tau: f64,
        mode: ArrivalMode,
    ) -> RequestBatch {
        let mut batch = RequestBatch {
            slot,
            events: Vec::new(),
        };
        self.fill_slot(rng, &mut batch, slot, lambda, tau, mode);
        batch
    }

    /// Like [`Workload::draw_slot`] but reuses the event buffer of `batch`.
    pub fn fill_slot<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        batch: &mut RequestBatch,
        slot: u64,
        lambda: f64,
        tau: f64,
        mode: ArrivalMode,
    ) {
        let count = slot_request_count(rng, lambda * tau, mode);
        batch.slot = slot;
        batch.events.clear();
        batch.events.reserve(count);
        for _ in 0..count {
            batch.events.push(self.draw_request(rng));
        }
    }
}

/// Number of arrivals in one slot with mean `mean`.
pub fn slot_request_count<R: Rng + ?Sized>(rng: &mut R, mean: f64, mode: ArrivalMode) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    match mode {
        ArrivalMode::Fixed => mean.round() as usize,
        ArrivalMode::Poisson => Poisson::new(mean)
            .map(|d| d.sample(rng) as usize)
            .unwrap_or_else(|_| mean.round() as usize),
    }
}
