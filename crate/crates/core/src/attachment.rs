//! Attachment functions `f: N0 -> (0, inf)` and the prefix-sum tables
//! `Phi_k(l) = sum_{i<l} f(i)^-k` with their derived map `K = Phi_2 o Phi_1^-1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::TriState;

/// Prefix length over which declared structural facts are checked.
pub const VALIDATION_HORIZON: usize = 1 << 16;

/// How a [`AttachmentKind::Table`] continues past its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TailRule {
    /// Undefined past the table; evaluating there is a domain error.
    None,
    /// `f(k) = values.last()` for every `k` past the table.
    RepeatLast,
    /// `f(k) = values.last() * ((k + 1) / len)^alpha` past the table.
    Power { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeOp {
    Product,
    Sum,
}

/// The closed form (or table) behind an attachment function.
///
/// `Affine { alpha }` is `f(k) = k + alpha`, so `Affine { alpha: 1.0 }` is
/// `f(k) = k + 1`. `Power { alpha }` is `f(k) = (k + 1)^alpha`. The two are
/// kept apart on purpose: both conventions show up for "linear" attachment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttachmentKind {
    Constant { c: f64 },
    Affine { alpha: f64 },
    Power { alpha: f64 },
    Table { values: Vec<f64>, tail: TailRule },
    Composite { op: CompositeOp, parts: Vec<AttachmentKind> },
}

impl AttachmentKind {
    fn eval(&self, k: u64) -> Result<f64> {
        Ok(match self {
            AttachmentKind::Constant { c } => *c,
            AttachmentKind::Affine { alpha } => k as f64 + alpha,
            AttachmentKind::Power { alpha } => ((k + 1) as f64).powf(*alpha),
            AttachmentKind::Table { values, tail } => {
                if (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    let last = *values.last().expect("validated non-empty");
                    match tail {
                        TailRule::None => {
                            return Err(Error::Domain(format!(
                                "f({k}) requested past a table of length {} with no tail rule",
                                values.len()
                            )))
                        }
                        TailRule::RepeatLast => last,
                        TailRule::Power { alpha } => last * ((k + 1) as f64 / values.len() as f64).powf(*alpha),
                    }
                }
            }
            AttachmentKind::Composite { op, parts } => {
                let mut acc = match op {
                    CompositeOp::Product => 1.0,
                    CompositeOp::Sum => 0.0,
                };
                for p in parts {
                    let v = p.eval(k)?;
                    match op {
                        CompositeOp::Product => acc *= v,
                        CompositeOp::Sum => acc += v,
                    }
                }
                acc
            }
        })
    }

    /// Largest argument the function is defined at, if bounded.
    fn domain_limit(&self) -> Option<u64> {
        match self {
            AttachmentKind::Table { values, tail: TailRule::None } => Some(values.len() as u64 - 1),
            AttachmentKind::Composite { parts, .. } => parts.iter().filter_map(|p| p.domain_limit()).min(),
            _ => None,
        }
    }

    fn check_params(&self) -> Result<()> {
        match self {
            AttachmentKind::Constant { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::Domain(format!("constant c must be positive, got {c}")));
                }
            }
            AttachmentKind::Affine { alpha } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(Error::Domain(format!("affine alpha must be >= 0, got {alpha}")));
                }
            }
            AttachmentKind::Power { alpha } => {
                if !(alpha.is_finite() && (0.0..2.0).contains(alpha)) {
                    return Err(Error::Domain(format!("power alpha must lie in [0, 2), got {alpha}")));
                }
            }
            AttachmentKind::Table { values, tail } => {
                if values.is_empty() {
                    return Err(Error::Domain("table must hold at least one value".into()));
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::Model(format!("table value f({i}) = {v} is not positive")));
                }
                if let TailRule::Power { alpha } = tail {
                    if !(alpha.is_finite() && *alpha >= 0.0) {
                        return Err(Error::Domain(format!("table tail alpha must be >= 0, got {alpha}")));
                    }
                }
            }
            AttachmentKind::Composite { parts, .. } => {
                if parts.is_empty() {
                    return Err(Error::Domain("composite needs at least one part".into()));
                }
                for p in parts {
                    p.check_params()?;
                }
            }
        }
        Ok(())
    }
}

/// An attachment rule plus the declared structural facts (monotonicity, linear bound).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentFunction {
    kind: AttachmentKind,
    monotone: bool,
    linear_bound: Option<f64>,
    f_star: f64,
}

impl AttachmentFunction {
    /// Builds `f` from a kind, checking parameters and filling in the facts
    /// that follow from the closed form (monotone flag, `C_f`, `f_*`).
    pub fn new(kind: AttachmentKind) -> Result<Self> {
        kind.check_params()?;
        let (monotone, linear_bound) = match &kind {
            AttachmentKind::Constant { c } => (true, Some(*c)),
            AttachmentKind::Affine { alpha } => (true, Some(alpha.max(1.0))),
            AttachmentKind::Power { alpha } => (true, if *alpha <= 1.0 { Some(1.0) } else { None }),
            _ => (false, None),
        };
        let f_star = match &kind {
            AttachmentKind::Constant { c } => *c,
            AttachmentKind::Affine { alpha } => *alpha,
            AttachmentKind::Power { .. } => 1.0,
            AttachmentKind::Table { values, tail } => {
                let m = values.iter().copied().fold(f64::INFINITY, f64::min);
                match tail {
                    // tail values never drop below the last entry for alpha >= 0
                    TailRule::None | TailRule::RepeatLast | TailRule::Power { .. } => m,
                }
            }
            AttachmentKind::Composite { .. } => {
                let limit = kind.domain_limit().map_or(VALIDATION_HORIZON as u64, |l| l.min(VALIDATION_HORIZON as u64));
                let mut m = f64::INFINITY;
                for k in 0..=limit {
                    m = m.min(kind.eval(k)?);
                }
                m
            }
        };
        if !(f_star > 0.0) {
            // Affine alpha = 0 has f(0) = 0. It remains usable where only
            // f(1), f(2), ... enter (the offspring law of non-root vertices).
            if !matches!(kind, AttachmentKind::Affine { .. }) {
                return Err(Error::Model(format!("inf f = {f_star} is not positive")));
            }
        }
        Ok(Self { kind, monotone, linear_bound, f_star })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(AttachmentKind::Constant { c })
    }

    /// `f(k) = k + alpha`.
    pub fn affine(alpha: f64) -> Result<Self> {
        Self::new(AttachmentKind::Affine { alpha })
    }

    /// `f(k) = (k + 1)^alpha`.
    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(AttachmentKind::Power { alpha })
    }

    pub fn table(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        Self::new(AttachmentKind::Table { values, tail })
    }

    pub fn composite(op: CompositeOp, parts: Vec<AttachmentKind>) -> Result<Self> {
        Self::new(AttachmentKind::Composite { op, parts })
    }

    /// Declares `f` non-decreasing; checked on `0..VALIDATION_HORIZON`.
    pub fn declare_monotone(mut self, monotone: bool) -> Result<Self> {
        if monotone {
            let limit = self.validation_limit();
            let mut prev = self.eval_f(0)?;
            for k in 1..=limit {
                let v = self.eval_f(k)?;
                if v < prev {
                    return Err(Error::Model(format!("declared monotone but f({k}) = {v} < f({}) = {prev}", k - 1)));
                }
                prev = v;
            }
        }
        self.monotone = monotone;
        Ok(self)
    }

    /// Declares `f(i) <= c_f (i + 1)`; checked on `0..VALIDATION_HORIZON`.
    pub fn with_linear_bound(mut self, c_f: f64) -> Result<Self> {
        if !(c_f.is_finite() && c_f > 0.0) {
            return Err(Error::Domain(format!("C_f must be positive, got {c_f}")));
        }
        for k in 0..=self.validation_limit() {
            let v = self.eval_f(k)?;
            if v > c_f * (k + 1) as f64 {
                return Err(Error::Model(format!("f({k}) = {v} exceeds C_f (k+1) = {}", c_f * (k + 1) as f64)));
            }
        }
        self.linear_bound = Some(c_f);
        Ok(self)
    }

    fn validation_limit(&self) -> u64 {
        let h = VALIDATION_HORIZON as u64;
        self.kind.domain_limit().map_or(h, |l| l.min(h))
    }

    pub fn kind(&self) -> &AttachmentKind {
        &self.kind
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn linear_bound(&self) -> Option<f64> {
        self.linear_bound
    }

    /// `f_* = inf_{i >= 0} f(i)`.
    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// `inf_{i >= a} f(i)`; exact for closed forms, prefix-based otherwise.
    pub fn f_star_from(&self, a: u64) -> Result<f64> {
        if self.monotone {
            return self.eval_f(a);
        }
        if let AttachmentKind::Constant { c } = self.kind {
            return Ok(c);
        }
        let limit = self.validation_limit().max(a);
        let mut m = f64::INFINITY;
        for k in a..=limit {
            m = m.min(self.eval_f(k)?);
        }
        Ok(m)
    }

    /// `f(k)`.
    pub fn eval_f(&self, k: u64) -> Result<f64> {
        self.kind.eval(k)
    }

    /// `f(x) = f(floor(x))` for real `x >= 0`.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("f is defined on [0, inf), got {x}")));
        }
        self.eval_f(x.floor() as u64)
    }

    /// `Some(c)` when `f` is the constant `c`.
    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            AttachmentKind::Constant { c } => Some(c),
            AttachmentKind::Power { alpha: 0.0 } => Some(1.0),
            _ => None,
        }
    }

    /// Largest argument `f` is defined at, when the table has no tail.
    pub fn domain_limit(&self) -> Option<u64> {
        self.kind.domain_limit()
    }

    /// Whether `f(k) -> inf`, decided from the closed form when possible.
    pub fn tends_to_infinity(&self) -> TriState {
        match &self.kind {
            AttachmentKind::Constant { .. } => TriState::False,
            AttachmentKind::Affine { .. } => TriState::True,
            AttachmentKind::Power { alpha } => TriState::from(*alpha > 0.0),
            AttachmentKind::Table { tail, .. } => match tail {
                TailRule::None => TriState::Unknown,
                TailRule::RepeatLast => TriState::False,
                TailRule::Power { alpha } => TriState::from(*alpha > 0.0),
            },
            AttachmentKind::Composite { .. } => TriState::Unknown,
        }
    }

    /// Short label for metadata and CSV rows.
    pub fn label(&self) -> String {
        match &self.kind {
            AttachmentKind::Constant { c } => format!("constant({c})"),
            AttachmentKind::Affine { alpha } => format!("affine({alpha})"),
            AttachmentKind::Power { alpha } => format!("power({alpha})"),
            AttachmentKind::Table { values, .. } => format!("table(len={})", values.len()),
            AttachmentKind::Composite { op, parts } => format!("composite({op:?}, {} parts)", parts.len()),
        }
    }
}

/// Memoized `f(offset + k)` values, grown on demand.
#[derive(Debug, Clone)]
pub struct RateCache<'a> {
    fun: &'a AttachmentFunction,
    offset: u64,
    values: Vec<f64>,
}

impl<'a> RateCache<'a> {
    pub fn new(fun: &'a AttachmentFunction, offset: u64) -> Self {
        Self { fun, offset, values: Vec::new() }
    }

    /// `f(offset + k)`.
    #[inline]
    pub fn get(&mut self, k: usize) -> Result<f64> {
        if k < self.values.len() {
            return Ok(self.values[k]);
        }
        self.grow_to(k)?;
        Ok(self.values[k])
    }

    #[cold]
    fn grow_to(&mut self, k: usize) -> Result<()> {
        let target = (k + 1).max(self.values.len() * 2).max(64);
        let target = match self.fun.domain_limit() {
            Some(l) => target.min((l + 1).saturating_sub(self.offset) as usize).max(k + 1),
            None => target,
        };
        self.values.reserve(target - self.values.len());
        for j in self.values.len()..target {
            let v = self.fun.eval_f(self.offset + j as u64)?;
            if !(v > 0.0) {
                return Err(Error::Model(format!("f({}) = {v} is not positive", self.offset + j as u64)));
            }
            self.values.push(v);
        }
        Ok(())
    }
}

/// Classification of `Phi_2(inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Phi2Tail {
    /// Finite, with an estimate and a bound on `value - phi2[horizon]`.
    Finite {
        value: f64,
        tail_bound: f64,
    },
    Infinite,
    Unknown,
}

impl Phi2Tail {
    pub fn is_finite(&self) -> TriState {
        match self {
            Phi2Tail::Finite { .. } => TriState::True,
            Phi2Tail::Infinite => TriState::False,
            Phi2Tail::Unknown => TriState::Unknown,
        }
    }
}

/// Tables of `Phi_1`, `Phi_2`, `Phi_3` on `0..=horizon`, linearly interpolated.
#[derive(Debug, Clone)]
pub struct PhiTable {
    fun: AttachmentFunction,
    horizon: usize,
    /// `recip[l] = 1 / f(l)` for `l < horizon`.
    recip: Vec<f64>,
    phi: [Vec<f64>; 3],
    phi2_tail: Phi2Tail,
}

/// Smallest `L` with `Phi_1(L) >= t`, searching up to `cap`.
fn phi1_horizon_for(fun: &AttachmentFunction, t: f64, cap: usize) -> Option<usize> {
    let mut s = CompensatedSum::new();
    if t <= 0.0 {
        return Some(0);
    }
    for l in 0..cap {
        let v = fun.eval_f(l as u64).ok()?;
        s.add(1.0 / v);
        if s.value() >= t {
            return Some(l + 1);
        }
    }
    None
}

const HORIZON_SEARCH_CAP: usize = 1 << 31;

impl PhiTable {
    /// Builds the tables up to `horizon` with compensated summation.
    pub fn build(fun: &AttachmentFunction, horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::Domain("phi table horizon must be >= 1".into()));
        }
        if let Some(limit) = fun.domain_limit() {
            if horizon as u64 > limit + 1 {
                return Err(Error::Range {
                    what: format!("table-defined f covers only {} values", limit + 1),
                    needed_horizon: horizon,
                });
            }
        }
        let mut recip = Vec::with_capacity(horizon);
        let mut phi = [Vec::with_capacity(horizon + 1), Vec::with_capacity(horizon + 1), Vec::with_capacity(horizon + 1)];
        let mut sums = [CompensatedSum::new(); 3];
        for p in phi.iter_mut() {
            p.push(0.0);
        }
        for l in 0..horizon {
            let v = fun.eval_f(l as u64)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Model(format!("f({l}) = {v} is not positive")));
            }
            recip.push(1.0 / v);
            for k in 0..3 {
                sums[k].add(Self::power_recip(v, k + 1));
                phi[k].push(sums[k].value());
            }
        }
        let mut table = Self { fun: fun.clone(), horizon, recip, phi, phi2_tail: Phi2Tail::Unknown };
        table.phi2_tail = table.classify_phi2()?;
        Ok(table)
    }

    /// Builds a table whose `Phi_1` reaches at least `t`.
    pub fn covering(fun: &AttachmentFunction, t: f64) -> Result<Self> {
        let h = phi1_horizon_for(fun, t, HORIZON_SEARCH_CAP).ok_or_else(|| Error::Range {
            what: format!("Phi_1 does not reach {t} within {HORIZON_SEARCH_CAP} terms"),
            needed_horizon: usize::MAX,
        })?;
        Self::build(fun, h.max(16))
    }

    #[inline]
    fn power_recip(v: f64, k: usize) -> f64 {
        match k {
            1 => 1.0 / v,
            2 => 1.0 / (v * v),
            _ => 1.0 / (v * v * v),
        }
    }

    pub fn function(&self) -> &AttachmentFunction {
        &self.fun
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn phi2_tail(&self) -> Phi2Tail {
        self.phi2_tail
    }

    /// The stored increment `f(l)^-k`, bit-identical to `1 / f(l)^k`.
    pub fn increment(&self, k: usize, l: usize) -> f64 {
        Self::power_recip(1.0 / self.recip[l], k)
    }

    /// `1 / f(l)` for `l < horizon`.
    pub fn recip(&self) -> &[f64] {
        &self.recip
    }

    /// Raw table `phi_k[0..=horizon]`, `k` in `1..=3`.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.phi[k - 1]
    }

    /// `Phi_k(l)` at an integer point.
    pub fn at(&self, k: usize, l: usize) -> Result<f64> {
        self.phi[k - 1]
            .get(l)
            .copied()
            .ok_or_else(|| Error::Range { what: format!("Phi_{k}({l}) past table horizon {}", self.horizon), needed_horizon: l })
    }

    /// `Phi_k(x)` with linear interpolation, `x` in `[0, horizon]`.
    pub fn phi(&self, k: usize, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("Phi_k needs x >= 0, got {x}")));
        }
        if x > self.horizon as f64 {
            return Err(Error::Range {
                what: format!("Phi_{k}({x}) past table horizon {}", self.horizon),
                needed_horizon: x.ceil() as usize,
            });
        }
        let col = &self.phi[k - 1];
        let j = (x.floor() as usize).min(self.horizon - 1);
        let frac = x - j as f64;
        if frac == 0.0 {
            return Ok(col[j]);
        }
        Ok(col[j] + frac * (col[j + 1] - col[j]))
    }

    /// Segment `j` and fraction with `Phi_1(j + frac) = t`.
    fn locate_phi1(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("Phi_1^-1 needs t >= 0, got {t}")));
        }
        let col = &self.phi[0];
        if t > col[self.horizon] {
            let needed = phi1_horizon_for(&self.fun, t, HORIZON_SEARCH_CAP).unwrap_or(usize::MAX);
            return Err(Error::Range {
                what: format!("Phi_1^-1({t}) past Phi_1(horizon) = {}", col[self.horizon]),
                needed_horizon: needed,
            });
        }
        // largest j with col[j] <= t, capped at horizon - 1
        let j = col.partition_point(|&v| v <= t).saturating_sub(1).min(self.horizon - 1);
        let frac = (t - col[j]) / (col[j + 1] - col[j]);
        Ok((j, frac.clamp(0.0, 1.0)))
    }

    /// `Phi_1^-1(t)`.
    pub fn phi1_inverse(&self, t: f64) -> Result<f64> {
        let (j, frac) = self.locate_phi1(t)?;
        Ok(j as f64 + frac)
    }

    /// `K(t) = Phi_2(Phi_1^-1(t))`.
    pub fn k_of(&self, t: f64) -> Result<f64> {
        let (j, frac) = self.locate_phi1(t)?;
        let col = &self.phi[1];
        if frac == 0.0 {
            return Ok(col[j]);
        }
        Ok(col[j] + frac * (col[j + 1] - col[j]))
    }

    /// `K^-1(y) = Phi_1(Phi_2^-1(y))`, by binary search over the `Phi_2`
    /// column. `None` when `y` lies past the covered range of `K`.
    pub fn k_inverse(&self, y: f64) -> Option<f64> {
        if !(y >= 0.0) {
            return None;
        }
        let col = &self.phi[1];
        if y > col[self.horizon] {
            return None;
        }
        let j = col.partition_point(|&v| v <= y).saturating_sub(1).min(self.horizon - 1);
        let frac = ((y - col[j]) / (col[j + 1] - col[j])).clamp(0.0, 1.0);
        let p1 = &self.phi[0];
        Some(p1[j] + frac * (p1[j + 1] - p1[j]))
    }

    /// `(K(t), K^-1(t))`.
    pub fn k_and_inverse(&self, t: f64) -> Result<(f64, Option<f64>)> {
        Ok((self.k_of(t)?, self.k_inverse(t)))
    }

    /// `f_bar(t) = f(Phi_1^-1(t))`.
    pub fn f_bar(&self, t: f64) -> Result<f64> {
        let x = self.phi1_inverse(t)?;
        self.fun.eval_real(x)
    }

    fn classify_phi2(&self) -> Result<Phi2Tail> {
        let l = self.horizon as f64;
        let p2 = self.phi[1][self.horizon];
        Ok(match self.fun.kind() {
            AttachmentKind::Constant { .. } => Phi2Tail::Infinite,
            AttachmentKind::Affine { alpha } => {
                // sum_{k >= L} (k + alpha)^-2
                let est = 1.0 / (l + alpha - 0.5);
                let bound = if l + alpha > 1.0 { 1.0 / (l + alpha - 1.0) } else { f64::INFINITY };
                Phi2Tail::Finite { value: p2 + est, tail_bound: bound }
            }
            AttachmentKind::Power { alpha } => power_tail(p2, l, 2.0 * alpha, 1.0),
            AttachmentKind::Table { values, tail } => match tail {
                TailRule::None => Phi2Tail::Unknown,
                TailRule::RepeatLast => Phi2Tail::Infinite,
                TailRule::Power { alpha } => {
                    // f(k) = last ((k+1)/len)^alpha, so f^-2 = c (k+1)^-2 alpha
                    let last = *values.last().unwrap();
                    let scale = (values.len() as f64).powf(2.0 * alpha) / (last * last);
                    if self.horizon >= values.len() {
                        power_tail(p2, l, 2.0 * alpha, scale)
                    } else {
                        self.heuristic_phi2()?
                    }
                }
            },
            AttachmentKind::Composite { .. } => self.heuristic_phi2()?,
        })
    }

    /// Tail-exponent fit on the top decade of the table.
    fn heuristic_phi2(&self) -> Result<Phi2Tail> {
        if self.horizon < 100 {
            return Ok(Phi2Tail::Unknown);
        }
        let beta = self.tail_exponent()?;
        let p2 = self.phi[1][self.horizon];
        let l = self.horizon as f64;
        Ok(if 2.0 * beta > 1.1 {
            let f_l = self.fun.eval_f(self.horizon as u64)?;
            // sum_{k >= L} f(L)^-2 (k/L)^-2 beta ~ L f(L)^-2 / (2 beta - 1)
            let est = l / (f_l * f_l) / (2.0 * beta - 1.0);
            Phi2Tail::Finite { value: p2 + est, tail_bound: 2.0 * est }
        } else if 2.0 * beta < 0.9 {
            Phi2Tail::Infinite
        } else {
            Phi2Tail::Unknown
        })
    }

    /// Least-squares slope of `log f(k)` against `log(k + 1)` over the top decade.
    pub fn tail_exponent(&self) -> Result<f64> {
        let hi = self.horizon as f64;
        let lo = hi / 10.0;
        let n = 16;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let k = (lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).floor().min(hi - 1.0);
            let x = (k + 1.0).ln();
            let y = self.fun.eval_f(k as u64)?.ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let nf = n as f64;
        Ok((nf * sxy - sx * sy) / (nf * sxx - sx * sx))
    }
}

/// `Phi_2` tail for `f^-2(k) = scale (k+1)^-p`.
fn power_tail(p2: f64, l: f64, p: f64, scale: f64) -> Phi2Tail {
    if p <= 1.0 {
        return Phi2Tail::Infinite;
    }
    // sum_{k >= L} (k+1)^-p: midpoint integral estimate, plain integral bound
    let est = scale * (l + 0.5).powf(1.0 - p) / (p - 1.0);
    let bound = scale * l.powf(1.0 - p) / (p - 1.0);
    Phi2Tail::Finite { value: p2 + est, tail_bound: bound }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_f_closed_forms() {
        assert_eq!(AttachmentFunction::constant(1.0).unwrap().eval_f(7).unwrap(), 1.0);
        assert_eq!(AttachmentFunction::power(0.5).unwrap().eval_f(3).unwrap(), 2.0);
        assert_eq!(AttachmentFunction::affine(1.0).unwrap().eval_f(4).unwrap(), 5.0);
    }

    #[test]
    fn table_without_tail_is_a_domain_error_past_the_end() {
        let f = AttachmentFunction::table(vec![1.0, 2.0, 3.0], TailRule::None).unwrap();
        assert_eq!(f.eval_f(2).unwrap(), 3.0);
        assert!(matches!(f.eval_f(3), Err(Error::Domain(_))));
        let g = AttachmentFunction::table(vec![1.0, 2.0], TailRule::RepeatLast).unwrap();
        assert_eq!(g.eval_f(100).unwrap(), 2.0);
        let h = AttachmentFunction::table(vec![1.0, 2.0], TailRule::Power { alpha: 1.0 }).unwrap();
        assert_eq!(h.eval_f(3).unwrap(), 4.0);
    }

    #[test]
    fn extension_to_reals_uses_floor() {
        let f = AttachmentFunction::affine(1.0).unwrap();
        assert_eq!(f.eval_real(2.99).unwrap(), 3.0);
        assert!(f.eval_real(-0.1).is_err());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(AttachmentFunction::constant(0.0).is_err());
        assert!(AttachmentFunction::power(-0.1).is_err());
        assert!(AttachmentFunction::power(2.0).is_err());
        assert!(AttachmentFunction::affine(-0.1).is_err());
        assert!(matches!(AttachmentFunction::table(vec![1.0, 0.0], TailRule::None), Err(Error::Model(_))));
    }

    #[test]
    fn declared_facts_are_checked() {
        let t = AttachmentFunction::table(vec![1.0, 3.0, 2.0], TailRule::RepeatLast).unwrap();
        assert!(t.clone().declare_monotone(true).is_err());
        assert!(t.clone().with_linear_bound(0.5).is_err());
        assert!(t.with_linear_bound(1.5).is_ok());
        let f = AttachmentFunction::power(0.3).unwrap();
        assert!(f.is_monotone());
        assert_eq!(f.linear_bound(), Some(1.0));
        assert_eq!(f.f_star(), 1.0);
    }

    #[test]
    fn composite_product_of_power_and_bounded_factor() {
        let f = AttachmentFunction::composite(
            CompositeOp::Product,
            vec![
                AttachmentKind::Power { alpha: 0.3 },
                AttachmentKind::Table { values: vec![1.0, 2.0], tail: TailRule::RepeatLast },
            ],
        )
        .unwrap();
        assert_eq!(f.eval_f(0).unwrap(), 1.0);
        assert!((f.eval_f(3).unwrap() - 2.0 * 4f64.powf(0.3)).abs() < 1e-15);
        assert_eq!(f.f_star(), 1.0);
    }

    #[test]
    fn unit_rates_table() {
        let t = PhiTable::build(&AttachmentFunction::constant(1.0).unwrap(), 5).unwrap();
        assert_eq!(t.column(1), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(t.column(2), t.column(1));
        assert_eq!(t.phi2_tail(), Phi2Tail::Infinite);
        assert_eq!(t.phi1_inverse(3.5).unwrap(), 3.5);
        for x in [0.0, 0.7, 2.0, 4.9] {
            assert_eq!(t.k_of(x).unwrap(), x);
        }
    }

    #[test]
    fn harmonic_prefix() {
        let t = PhiTable::build(&AttachmentFunction::affine(1.0).unwrap(), 10).unwrap();
        assert!((t.at(1, 3).unwrap() - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn phi2_finite_for_square_rates() {
        // f(k) = (k+1)^2 is outside the Power kind's range; use the table tail.
        let f = AttachmentFunction::table(vec![1.0], TailRule::Power { alpha: 2.0 }).unwrap();
        let t = PhiTable::build(&f, 2000).unwrap();
        let target = std::f64::consts::PI.powi(4) / 90.0;
        match t.phi2_tail() {
            Phi2Tail::Finite { value, tail_bound } => {
                assert!((value - target).abs() < 1e-12, "{value} vs {target}");
                assert!(value >= t.at(2, 2000).unwrap());
                assert!(value - t.at(2, 2000).unwrap() <= tail_bound);
            }
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn phi2_classification_by_alpha() {
        let fin = PhiTable::build(&AttachmentFunction::power(0.8).unwrap(), 1000).unwrap();
        assert!(matches!(fin.phi2_tail(), Phi2Tail::Finite { .. }));
        let inf = PhiTable::build(&AttachmentFunction::power(0.3).unwrap(), 1000).unwrap();
        assert_eq!(inf.phi2_tail(), Phi2Tail::Infinite);
        let half = PhiTable::build(&AttachmentFunction::power(0.5).unwrap(), 1000).unwrap();
        assert_eq!(half.phi2_tail(), Phi2Tail::Infinite);
    }

    #[test]
    fn heuristic_classification_on_composites() {
        let sub = AttachmentFunction::composite(
            CompositeOp::Sum,
            vec![AttachmentKind::Power { alpha: 0.2 }, AttachmentKind::Constant { c: 0.5 }],
        )
        .unwrap();
        assert_eq!(PhiTable::build(&sub, 100_000).unwrap().phi2_tail(), Phi2Tail::Infinite);
        let sup = AttachmentFunction::composite(
            CompositeOp::Sum,
            vec![AttachmentKind::Power { alpha: 0.9 }, AttachmentKind::Constant { c: 0.5 }],
        )
        .unwrap();
        assert!(matches!(PhiTable::build(&sup, 100_000).unwrap().phi2_tail(), Phi2Tail::Finite { .. }));
        let edge = AttachmentFunction::composite(
            CompositeOp::Product,
            vec![AttachmentKind::Power { alpha: 0.5 }, AttachmentKind::Constant { c: 2.0 }],
        )
        .unwrap();
        assert_eq!(PhiTable::build(&edge, 100_000).unwrap().phi2_tail(), Phi2Tail::Unknown);
    }

    #[test]
    fn range_errors_name_the_needed_horizon() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let t = PhiTable::build(&f, 10).unwrap();
        match t.phi1_inverse(25.5) {
            Err(Error::Range { needed_horizon, .. }) => assert_eq!(needed_horizon, 26),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phi1_inverse_round_trip_for_linear_rates() {
        let t = PhiTable::build(&AttachmentFunction::affine(1.0).unwrap(), 100).unwrap();
        // Phi_1(1) = 1/f(0) = 1 sits on a knot
        assert_eq!(t.phi1_inverse(1.0).unwrap(), 1.0);
        let x = t.phi1_inverse(1.2).unwrap();
        assert!(x > 1.0 && x < 2.0);
        assert!((t.phi(1, x).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn k_at_integer_phi1_is_exact() {
        let f = AttachmentFunction::power(0.3).unwrap();
        let t = PhiTable::build(&f, 5000).unwrap();
        for l in [0usize, 1, 2, 17, 999, 4999] {
            assert_eq!(t.k_of(t.at(1, l).unwrap()).unwrap(), t.at(2, l).unwrap());
        }
    }

    #[test]
    fn k_inverse_inverts_k() {
        let f = AttachmentFunction::power(0.3).unwrap();
        let t = PhiTable::build(&f, 5000).unwrap();
        for s in [0.5, 3.0, 40.0, 200.0] {
            let y = t.k_of(s).unwrap();
            let back = t.k_inverse(y).unwrap();
            assert!((back - s).abs() < 1e-9 * s.max(1.0), "{s} -> {y} -> {back}");
        }
        assert!(t.k_inverse(1e9).is_none());
    }
}
