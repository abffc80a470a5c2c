//! Solving the two-equation system, certifying a triple, and enumeration.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fibration::{euler_number, is_fibred, Fibred};
use crate::necklace::{build_config, ppt_check, region_membership, validate_triple, InequalityId};
use crate::oracle::{euler_via_angle_tracking, solve_system64};
use crate::scalar::{cos_frac, CertifiedScalar, Precision, Real, Sign};

/// Exact solution of `(1−c_1)x1 + (1−c_m)x2 = 1`,
/// `(1−c_1²)(c_k−c_m)x1 = (1−c_m²)(c_1−c_k)x2`.
pub fn solve_system(k: i64, m: i64, n: i64, policy: Precision) -> Result<(Real, Real)> {
    validate_triple(k, m, n)?;
    let one = Real::one();
    let (c1, ck, cm) = (cos_frac(1, n)?, cos_frac(k, n)?, cos_frac(m, n)?);
    let a11 = &one - &c1;
    let a12 = &one - &cm;
    let a21 = (&one - &c1 * &c1) * (&ck - &cm);
    let a22 = -((&one - &cm * &cm) * (&c1 - &ck));
    let det = &a11 * &a22 - &a12 * &a21;
    match det.sign(policy).verdict {
        Sign::StrictlyPositive | Sign::StrictlyNegative => {}
        Sign::Zero => return Err(Error::Precondition("singular system".into())),
        Sign::Undecided => return Err(Error::Undecided("determinant of the system".into())),
    }
    let x1 = &a22 / &det;
    let x2 = -(&a21 / &det);
    let r1 = &a11 * &x1 + &a12 * &x2 - &one;
    let r2 = &a21 * &x1 + &a22 * &x2;
    if !(r1.is_zero() && r2.is_zero()) {
        return Err(Error::Precondition("back-substitution residual is not exactly zero".into()));
    }
    Ok((x1, x2))
}

/// One of the inequalities `2 < (1−c_i)x1 + (1−c_{mi})x2`, `2 ≤ i ≤ n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityEntry {
    pub i: i64,
    /// Lower end of the certified enclosure of the slack.
    pub lower_bound: Option<f64>,
    pub verdict: Sign,
    /// Working precision at which the verdict was reached.
    pub bits_used: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleCertificate {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub feasible: bool,
    /// False when some step stayed undecided at the precision cap.
    pub certified: bool,
    pub x1: Option<CertifiedScalar>,
    pub x2: Option<CertifiedScalar>,
    pub inequalities: Vec<InequalityEntry>,
    pub ppt_ok: bool,
    pub e_p: Option<i64>,
    pub chi_orbifold: Ratio<i64>,
    pub e_m: Option<i64>,
    pub chi_manifold: i64,
    pub genus: i64,
    pub ratio: Option<Ratio<i64>>,
    pub oracle_euler: Option<i64>,
    /// Human-readable notes, e.g. a ratio above 1.
    pub warnings: Vec<String>,
}

impl BundleCertificate {
    fn empty(k: i64, m: i64, n: i64) -> Self {
        BundleCertificate {
            k,
            m,
            n,
            feasible: false,
            certified: true,
            x1: None,
            x2: None,
            inequalities: Vec::new(),
            ppt_ok: false,
            e_p: None,
            chi_orbifold: Ratio::new(-(n - 4), 4),
            e_m: None,
            chi_manifold: -(n - 4),
            genus: (n - 2) / 2,
            ratio: None,
            oracle_euler: None,
            warnings: Vec::new(),
        }
    }

    /// Smallest `i` whose inequality is not certified to hold.
    pub fn first_failing_index(&self) -> Option<i64> {
        self.inequalities
            .iter()
            .find(|e| e.verdict != Sign::StrictlyPositive)
            .map(|e| e.i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    pub policy: Precision,
    /// Cross-check the Euler number with the floating-point oracle.
    pub oracle: bool,
    /// Oracle samples; defaults to `16 n`.
    pub samples: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            policy: Precision::default(),
            oracle: true,
            samples: None,
        }
    }
}

/// Digits printed for exported parameter values.
const EXPORT_BITS: u32 = 128;

/// Full pipeline for one triple. Domain errors are returned as `Err`; every
/// other outcome, including undecided comparisons, becomes a certificate.
pub fn certify_bundle(k: i64, m: i64, n: i64, opts: CertifyOptions) -> Result<BundleCertificate> {
    validate_triple(k, m, n)?;
    let mut cert = BundleCertificate::empty(k, m, n);
    match run_pipeline(&mut cert, opts) {
        Ok(()) => {}
        Err(Error::Undecided(what)) => {
            cert.certified = false;
            cert.feasible = false;
            cert.warnings.push(format!("uncertified: {what}"));
        }
        Err(e) => return Err(e),
    }
    Ok(cert)
}

fn run_pipeline(cert: &mut BundleCertificate, opts: CertifyOptions) -> Result<()> {
    let (k, m, n) = (cert.k, cert.m, cert.n);
    let policy = opts.policy;
    let (x1, x2) = solve_system(k, m, n, policy)?;
    cert.x1 = Some(x1.enclose(EXPORT_BITS)?);
    cert.x2 = Some(x2.enclose(EXPORT_BITS)?);
    let region = region_membership(k, m, n, &x1, &x2, policy)?;
    cert.inequalities = region
        .checks
        .iter()
        .filter_map(|c| match c.id {
            InequalityId::Lower(i) => Some(InequalityEntry {
                i,
                lower_bound: match (&c.enclosure, c.certificate.verdict) {
                    (Some(e), _) => Some(e.lower.to_f64_down()),
                    (None, Sign::Zero) => Some(0.0),
                    (None, _) => None,
                },
                verdict: c.certificate.verdict,
                bits_used: c.certificate.bits_used,
            }),
            _ => None,
        })
        .collect();
    if !region.certified {
        return Err(Error::Undecided("membership in the feasible region".into()));
    }
    if !region.inside {
        return Ok(());
    }
    let cfg = build_config(k, m, n, x1.clone(), x2.clone(), policy)?;
    let ppt = ppt_check(&cfg)?;
    cert.ppt_ok = ppt.ok;
    match is_fibred(&cfg, policy)? {
        Fibred::Exact(j) if j == k => {}
        other => {
            return Err(Error::Precondition(format!(
                "cos a at the solution is not c_k (got {other:?})"
            )))
        }
    }
    let euler = euler_number(k, m, n, (&x1, &x2), policy)?;
    cert.e_p = Some(euler.value);
    cert.e_m = Some(4 * euler.value);
    let ratio = Ratio::new((4 * euler.value).abs(), n - 4);
    cert.ratio = Some(ratio);
    if ratio > Ratio::from_integer(1) {
        cert.warnings.push(format!("ratio {ratio} exceeds 1"));
    }
    if opts.oracle {
        let end = solve_system64(k, m, n)?;
        let samples = opts.samples.unwrap_or(16 * n as usize);
        cert.oracle_euler = Some(euler_via_angle_tracking(k, m, n, end, samples)?.count);
    }
    let oracle_agrees = cert.oracle_euler.is_none_or(|o| o == euler.value);
    cert.feasible = ppt.ok && euler.value == m - k && oracle_agrees;
    if !oracle_agrees {
        cert.warnings.push("oracle Euler number disagrees".into());
    }
    Ok(())
}

/// All triples with even `8 ≤ n ≤ n_max` and `1 < k < m < n/2`, sorted by `(n, m, k)`.
pub fn triples(n_max: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    let mut n = 8;
    while n <= n_max {
        for m in 3..(n + 1) / 2 {
            if 2 * m >= n {
                break;
            }
            for k in 2..m {
                out.push((k, m, n));
            }
        }
        n += 2;
    }
    out
}

/// Certifies every triple up to `n_max` on `workers` threads. With a ratio
/// filter only feasible certificates with exactly that ratio are kept.
pub fn enumerate(n_max: i64, ratio_filter: Option<Ratio<i64>>, opts: CertifyOptions, workers: usize) -> Result<Vec<BundleCertificate>> {
    if n_max < 8 {
        return Err(Error::Domain(format!("n_max must be at least 8, got {n_max}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let list = triples(n_max);
    let mut certs: Vec<BundleCertificate> = pool.install(|| {
        list.par_iter()
            .map(|&(k, m, n)| certify_bundle(k, m, n, opts))
            .collect::<Result<Vec<_>>>()
    })?;
    certs.sort_by_key(|c| (c.n, c.m, c.k));
    if let Some(r) = ratio_filter {
        certs.retain(|c| c.feasible && c.ratio == Some(r));
    }
    Ok(certs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_list_is_sorted_and_complete() {
        let t = triples(10);
        assert_eq!(t, vec![(2, 3, 8), (2, 3, 10), (2, 4, 10), (3, 4, 10)]);
        let mut sorted = triples(30);
        sorted.sort_by_key(|&(k, m, n)| (n, m, k));
        assert_eq!(sorted, triples(30));
    }

    #[test]
    fn small_infeasible_triple_reports_failing_index() {
        let opts = CertifyOptions {
            oracle: false,
            ..CertifyOptions::default()
        };
        let c = certify_bundle(2, 3, 8, opts).unwrap();
        assert!(!c.feasible);
        assert!(c.certified);
        assert_eq!(c.inequalities.len(), 3);
        assert!(c.first_failing_index().is_some());
        assert_eq!(c.e_p, None);
    }

    #[test]
    fn reference_triple_certifies() {
        let c = certify_bundle(2, 5, 24, CertifyOptions::default()).unwrap();
        assert!(c.feasible && c.certified && c.ppt_ok);
        assert_eq!(c.e_p, Some(3));
        assert_eq!(c.e_m, Some(12));
        assert_eq!(c.genus, 11);
        assert_eq!(c.ratio, Some(Ratio::new(3, 5)));
        assert_eq!(c.oracle_euler, Some(3));
    }
}
