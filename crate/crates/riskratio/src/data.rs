//! Domain types shared by the estimators, interval methods, simulation
//! harness, and I/O layers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Construction errors for the domain types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("cluster size must be at least 1")]
    ZeroClusterSize,
    #[error("cluster successes {successes} exceed cluster size {size}")]
    SuccessesExceedSize { size: u32, successes: u32 },
    #[error("a group needs at least 2 clusters, got {0}")]
    TooFewClusters(usize),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// One cluster: `size` individuals of which `successes` responded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub size: u32,
    pub successes: u32,
}

impl ClusterRecord {
    pub fn new(size: u32, successes: u32) -> Result<Self, DataError> {
        if size == 0 {
            return Err(DataError::ZeroClusterSize);
        }
        if successes > size {
            return Err(DataError::SuccessesExceedSize { size, successes });
        }
        Ok(Self { size, successes })
    }

    /// Per-cluster proportion of successes.
    pub fn proportion(&self) -> f64 {
        f64::from(self.successes) / f64::from(self.size)
    }
}

/// One treatment arm: an ordered sequence of at least two clusters.
///
/// Order is preserved but carries no meaning; every estimator in this crate
/// is permutation-invariant over clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ClusterRecord>", into = "Vec<ClusterRecord>")]
pub struct GroupData {
    clusters: Vec<ClusterRecord>,
}

impl GroupData {
    pub fn new(clusters: Vec<ClusterRecord>) -> Result<Self, DataError> {
        if clusters.len() < 2 {
            return Err(DataError::TooFewClusters(clusters.len()));
        }
        Ok(Self { clusters })
    }

    /// Builds a group from `(size, successes)` pairs.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self, DataError> {
        let clusters = pairs
            .iter()
            .map(|&(size, successes)| ClusterRecord::new(size, successes))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(clusters)
    }

    pub fn clusters(&self) -> &[ClusterRecord] {
        &self.clusters
    }

    /// Number of clusters in the group.
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Total number of individuals across clusters.
    pub fn total_size(&self) -> u64 {
        self.clusters.iter().map(|c| u64::from(c.size)).sum()
    }

    /// Total number of successes across clusters.
    pub fn total_successes(&self) -> u64 {
        self.clusters.iter().map(|c| u64::from(c.successes)).sum()
    }
}

impl TryFrom<Vec<ClusterRecord>> for GroupData {
    type Error = DataError;
    fn try_from(clusters: Vec<ClusterRecord>) -> Result<Self, DataError> {
        GroupData::new(clusters)
    }
}

impl From<GroupData> for Vec<ClusterRecord> {
    fn from(g: GroupData) -> Self {
        g.clusters
    }
}

/// A two-arm study: the ratio of interest is treatment rate over control rate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoGroupStudy {
    pub treatment: GroupData,
    pub control: GroupData,
}

impl TwoGroupStudy {
    pub fn new(treatment: GroupData, control: GroupData) -> Self {
        Self { treatment, control }
    }

    /// Point estimate of the risk ratio from pooled proportions.
    pub fn eta_hat(&self) -> f64 {
        let g1 = self.treatment.total_successes() as f64 / self.treatment.total_size() as f64;
        let g2 = self.control.total_successes() as f64 / self.control.total_size() as f64;
        g1 / g2
    }
}

/// Detail of the one-way ANOVA intraclass-correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccAnova {
    /// Untruncated moment estimate; may be negative.
    pub raw: f64,
    /// Estimate truncated to `[0, 1]`; all downstream math uses this value.
    pub truncated: f64,
    pub bms: f64,
    pub wms: f64,
    pub n_star: f64,
}

/// Per-group summary statistics derived from the raw clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    /// Pooled proportion of successes.
    pub gamma_hat: f64,
    /// ANOVA detail; `None` when the design is degenerate (all clusters of
    /// size one, or a zero denominator) and the ICC is taken as 0.
    pub anova: Option<IccAnova>,
    /// Intraclass correlation used downstream: truncated estimate, or 0 on a
    /// degenerate design.
    pub icc: f64,
    /// Variance inflation factor evaluated at `icc`.
    pub xi_hat: f64,
}

impl GroupSummary {
    /// True when the ICC used downstream differs from the raw moment
    /// estimate: truncation, or a degenerate design defaulted to zero.
    pub fn icc_adjusted(&self) -> bool {
        match self.anova {
            Some(a) => a.raw != a.truncated,
            None => true,
        }
    }
}

/// Which of the three variance estimators backs an effective sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarianceKind {
    /// Between-cluster variance of per-cluster proportions, equal weights.
    EqualWeights,
    /// Between-cluster variance with inverse-design-effect weights.
    OptimalWeights,
    /// Variance of the combined ratio estimator.
    RatioEstimator,
}

impl VarianceKind {
    pub const ALL: [VarianceKind; 3] = [
        VarianceKind::EqualWeights,
        VarianceKind::OptimalWeights,
        VarianceKind::RatioEstimator,
    ];

    /// Position within method families (`*1`, `*2`, `*3`).
    pub fn index(self) -> usize {
        match self {
            VarianceKind::EqualWeights => 0,
            VarianceKind::OptimalWeights => 1,
            VarianceKind::RatioEstimator => 2,
        }
    }
}

/// An effective sample size with its adjusted success count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSize {
    pub kind: VarianceKind,
    /// Effective number of independent observations; stays fractional.
    pub n_eff: f64,
    /// Adjusted success count, `gamma_used * n_eff`; left fractional.
    pub y_eff: f64,
    /// The proportion estimate paired with the variance kind.
    pub gamma_used: f64,
    /// The underlying variance estimate.
    pub variance: f64,
}

/// The 17 interval methods, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Method {
    HB1,
    MK1,
    MK2,
    MK3,
    IH1,
    IH2,
    IH3,
    KA1,
    KA2,
    KA3,
    DK1,
    DK2,
    DK3,
    FB1,
    FB2,
    FB3,
    MR3,
}

impl Method {
    pub const COUNT: usize = 17;

    pub const ALL: [Method; Method::COUNT] = [
        Method::HB1,
        Method::MK1,
        Method::MK2,
        Method::MK3,
        Method::IH1,
        Method::IH2,
        Method::IH3,
        Method::KA1,
        Method::KA2,
        Method::KA3,
        Method::DK1,
        Method::DK2,
        Method::DK3,
        Method::FB1,
        Method::FB2,
        Method::FB3,
        Method::MR3,
    ];

    /// The eight methods featured in detailed comparisons.
    pub const FEATURED: [Method; 8] = [
        Method::HB1,
        Method::MK3,
        Method::IH2,
        Method::KA2,
        Method::DK2,
        Method::DK3,
        Method::FB2,
        Method::MR3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::HB1 => "HB1",
            Method::MK1 => "MK1",
            Method::MK2 => "MK2",
            Method::MK3 => "MK3",
            Method::IH1 => "IH1",
            Method::IH2 => "IH2",
            Method::IH3 => "IH3",
            Method::KA1 => "KA1",
            Method::KA2 => "KA2",
            Method::KA3 => "KA3",
            Method::DK1 => "DK1",
            Method::DK2 => "DK2",
            Method::DK3 => "DK3",
            Method::FB1 => "FB1",
            Method::FB2 => "FB2",
            Method::FB3 => "FB3",
            Method::MR3 => "MR3",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Position in [`Method::ALL`].
    pub fn index(self) -> usize {
        Method::ALL.iter().position(|&m| m == self).unwrap()
    }

    /// Modified Katz log method for a variance kind.
    pub fn mk(kind: VarianceKind) -> Method {
        [Method::MK1, Method::MK2, Method::MK3][kind.index()]
    }

    /// Inverse hyperbolic sine method for a variance kind.
    pub fn ih(kind: VarianceKind) -> Method {
        [Method::IH1, Method::IH2, Method::IH3][kind.index()]
    }

    /// Score method for a variance kind.
    pub fn ka(kind: VarianceKind) -> Method {
        [Method::KA1, Method::KA2, Method::KA3][kind.index()]
    }

    /// Delta-Katz method for a variance kind.
    pub fn dk(kind: VarianceKind) -> Method {
        [Method::DK1, Method::DK2, Method::DK3][kind.index()]
    }

    /// Fieller-Bailey method for a variance kind.
    pub fn fb(kind: VarianceKind) -> Method {
        [Method::FB1, Method::FB2, Method::FB3][kind.index()]
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Why an interval does not exist for a given data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonexistenceReason {
    /// Fieller-type leading coefficient is not positive.
    ANonpositive,
    /// Fieller-type discriminant is negative.
    DiscriminantNegative,
    /// A group has no information left (e.g. adjusted successes equal the
    /// effective size).
    DegenerateGroup,
    /// A proportion estimate sits at 0 or 1.
    BoundaryProportion,
    /// The backing variance estimate is zero, so the effective size is
    /// unbounded.
    ZeroVariance,
    /// Root bracketing for the score interval exceeded its expansion budget.
    RootNotBracketed,
    /// Hybrid lower limit could not be recovered from the quadratic.
    MoverLowerDenominator,
    /// Hybrid upper limit denominator vanished (control lower limit is 0).
    MoverUpperDenominator,
    /// Hybrid lower-limit radicand is negative.
    MoverLowerRadicand,
    /// Hybrid upper-limit radicand is negative.
    MoverUpperRadicand,
}

impl NonexistenceReason {
    pub fn name(self) -> &'static str {
        match self {
            NonexistenceReason::ANonpositive => "A_NONPOSITIVE",
            NonexistenceReason::DiscriminantNegative => "DISCRIMINANT_NEGATIVE",
            NonexistenceReason::DegenerateGroup => "DEGENERATE_GROUP",
            NonexistenceReason::BoundaryProportion => "BOUNDARY_PROPORTION",
            NonexistenceReason::ZeroVariance => "ZERO_VARIANCE",
            NonexistenceReason::RootNotBracketed => "ROOT_NOT_BRACKETED",
            NonexistenceReason::MoverLowerDenominator => "MOVER_LOWER_DENOMINATOR",
            NonexistenceReason::MoverUpperDenominator => "MOVER_UPPER_DENOMINATOR",
            NonexistenceReason::MoverLowerRadicand => "MOVER_LOWER_RADICAND",
            NonexistenceReason::MoverUpperRadicand => "MOVER_UPPER_RADICAND",
        }
    }
}

impl std::fmt::Display for NonexistenceReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Diagnostic flags attached to an interval result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalFlags {
    /// An ICC estimate was truncated (or defaulted on a degenerate design).
    pub icc_truncated: bool,
    /// The lower limit was negative before clamping to 0.
    pub lower_clamped_at_zero: bool,
    /// The score root search had to expand its initial bracket.
    pub root_bracket_expanded: bool,
}

impl IntervalFlags {
    pub fn is_empty(&self) -> bool {
        *self == IntervalFlags::default()
    }

    /// Flag names in a stable order.
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.icc_truncated {
            out.push("ICC_TRUNCATED");
        }
        if self.lower_clamped_at_zero {
            out.push("LOWER_CLAMPED_AT_ZERO");
        }
        if self.root_bracket_expanded {
            out.push("ROOT_BRACKET_EXPANDED");
        }
        out
    }
}

impl std::fmt::Display for IntervalFlags {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.names().join("|"))
    }
}

/// Two-sided limits, or a marker that the method fails on these data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IntervalEstimate {
    Interval { lower: f64, upper: f64 },
    Nonexistent(NonexistenceReason),
}

/// The outcome of one interval method on one study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub method: Method,
    pub estimate: IntervalEstimate,
    pub flags: IntervalFlags,
}

impl IntervalResult {
    pub fn interval(method: Method, lower: f64, upper: f64) -> Self {
        Self {
            method,
            estimate: IntervalEstimate::Interval { lower, upper },
            flags: IntervalFlags::default(),
        }
    }

    pub fn nonexistent(method: Method, reason: NonexistenceReason) -> Self {
        Self {
            method,
            estimate: IntervalEstimate::Nonexistent(reason),
            flags: IntervalFlags::default(),
        }
    }

    pub fn exists(&self) -> bool {
        matches!(self.estimate, IntervalEstimate::Interval { .. })
    }

    pub fn limits(&self) -> Option<(f64, f64)> {
        match self.estimate {
            IntervalEstimate::Interval { lower, upper } => Some((lower, upper)),
            IntervalEstimate::Nonexistent(_) => None,
        }
    }

    pub fn width(&self) -> Option<f64> {
        self.limits().map(|(l, u)| u - l)
    }

    pub fn reason(&self) -> Option<NonexistenceReason> {
        match self.estimate {
            IntervalEstimate::Interval { .. } => None,
            IntervalEstimate::Nonexistent(r) => Some(r),
        }
    }

    /// Whether the interval exists and contains `value` (inclusive).
    pub fn covers(&self, value: f64) -> bool {
        self.limits()
            .map(|(l, u)| l <= value && value <= u)
            .unwrap_or(false)
    }
}

/// One Monte Carlo grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub clusters_per_group: u32,
    pub cluster_size: u32,
    pub gamma1: f64,
    /// True risk ratio; the control proportion is `gamma1 / eta`.
    pub eta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
    /// Target number of good replications.
    pub replications: u32,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn gamma2(&self) -> f64 {
        self.gamma1 / self.eta
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let err = |msg: String| Err(DataError::InvalidScenario(msg));
        if self.clusters_per_group < 2 {
            return err(format!("clusters_per_group {} < 2", self.clusters_per_group));
        }
        if self.cluster_size == 0 {
            return err("cluster_size must be at least 1".into());
        }
        if !(self.gamma1 > 0.0 && self.gamma1 < 1.0) {
            return err(format!("gamma1 {} outside (0, 1)", self.gamma1));
        }
        let gamma2 = self.gamma2();
        if !(gamma2 > 0.0 && gamma2 < 1.0) {
            return err(format!("gamma2 = gamma1/eta = {gamma2} outside (0, 1)"));
        }
        for (label, theta) in [("theta1", self.theta1), ("theta2", self.theta2)] {
            if !(0.0..1.0).contains(&theta) {
                return err(format!("{label} {theta} outside [0, 1)"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return err(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.replications == 0 {
            return err("replications must be positive".into());
        }
        Ok(())
    }
}

/// Per-method summary over the good replications of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: Method,
    /// Coverage probability.
    pub cp: f64,
    /// Mean interval width.
    pub ew: f64,
    /// Distal noncoverage proportion (true ratio above the interval).
    pub disncp: f64,
    /// Mesial noncoverage proportion (true ratio below the interval).
    pub mesncp: f64,
    /// Distal noncoverage over total noncoverage; `None` when there was no
    /// noncoverage at all.
    pub dnptnp: Option<f64>,
    /// Replications where this method's interval did not exist (only nonzero
    /// under per-method accounting).
    pub nonexistent: u64,
}

/// Metrics for one scenario cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub spec: ScenarioSpec,
    /// Replications discarded before reaching the target of good ones.
    pub rejected_samples: u64,
    /// Total replications generated (good + rejected).
    pub total_generated: u64,
    pub per_method: Vec<MethodMetrics>,
}

impl ScenarioMetrics {
    pub fn method(&self, method: Method) -> &MethodMetrics {
        &self.per_method[method.index()]
    }
}
