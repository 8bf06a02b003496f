use std::collections::BTreeMap;

use anyhow::bail;
use fglab_core::isogeny::{self, Isogeny, Psi};
use fglab_core::level::{self, LevelStructure};
use fglab_core::series::Discrepancy;
use fglab_core::theta::{self, ThetaStructure};
use fglab_core::{Error, FormalGroupLaw, MPSeries};
use serde_json::{json, Value};

use crate::report::Check;
use crate::scenario::{Scenario, Task};

type Outputs = BTreeMap<String, Value>;
type Certificates = BTreeMap<String, Check>;

pub fn dispatch(s: &Scenario) -> anyhow::Result<(Outputs, Certificates)> {
    let mut out = Outputs::new();
    let mut certs = Certificates::new();
    let ring = s.ring()?;
    let law = FormalGroupLaw::standard(&s.law_kind()?, &ring, s.cap)?;
    out.insert("ring".into(), json!(ring.describe()));
    match s.task {
        Task::FglAxioms => fgl_axioms(s, &law, &mut out, &mut certs)?,
        Task::Nseries => nseries(s, &law, &mut out, &mut certs)?,
        Task::Level => level_task(s, &law, &mut out, &mut certs)?,
        Task::Discriminant => discriminant(s, &law, &mut out, &mut certs)?,
        Task::CharInjectivity => char_injectivity(&law, &mut out, &mut certs)?,
        Task::Quotient => quotient(s, &law, &mut out, &mut certs)?,
        Task::Stagewise => stagewise(s, &law, &mut out, &mut certs)?,
        Task::CoherenceCoord => coherence_coord(s, &law, &mut out, &mut certs)?,
        Task::ThetaCheck => theta_check(s, &law, &mut out, &mut certs)?,
        Task::Rnorm => rnorm(s, &law, &mut out, &mut certs)?,
        Task::CoherenceTheta => coherence_theta(s, &law, &mut out, &mut certs)?,
    }
    Ok((out, certs))
}

fn text(f: &MPSeries, cap: usize) -> Value {
    json!(if f.is_exact() { f.to_text() } else { f.truncate(cap).to_text() })
}

fn diff(d: Option<Discrepancy>) -> Check {
    Check::clean(d)
}

fn element_name(a: &[u64]) -> String {
    let parts: Vec<String> = a.iter().map(u64::to_string).collect();
    parts.join(",")
}

fn fgl_axioms(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let report = law.check_axioms(s.cap)?;
    out.insert("law".into(), text(law.law(), s.cap));
    let height = match level::height(law) {
        Ok(h) => json!(h),
        Err(Error::InfiniteHeight) => json!("infinite"),
        Err(e) => return Err(e.into()),
    };
    out.insert("height".into(), height);
    certs.insert("unit".into(), diff(report.unit));
    certs.insert("commutative".into(), diff(report.commutative));
    certs.insert("associative".into(), diff(report.associative));
    Ok(())
}

fn nseries(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let cap = s.cap;
    let wanted = s.n_values.as_ref().map(|v| v.to_vec()).unwrap_or_else(|| vec![s.p as i64]);
    let mut series = BTreeMap::new();
    for n in wanted {
        series.insert(n.to_string(), text(&law.n_series(n, cap)?, cap));
    }
    out.insert("series".into(), json!(series));
    let Some(r) = s.range else { return Ok(()) };
    let span = r * r.max(2);
    let mut table = BTreeMap::new();
    for n in -span..=span {
        table.insert(n, law.n_series(n, cap)?);
    }
    let f = law.at_cap(cap)?.truncated(cap);
    let mut additive = None;
    let mut multiplicative = None;
    'outer: for m in -r..=r {
        for n in -r..=r {
            if additive.is_none() {
                if let Some(d) = f.add(&table[&m], &table[&n])?.first_difference(&table[&(m + n)])? {
                    additive = Some(format!("[{m}] + [{n}] at {d}"));
                }
            }
            if multiplicative.is_none() {
                let composed = table[&m].substitute(std::slice::from_ref(&table[&n]))?;
                if let Some(d) = composed.first_difference(&table[&(m * n)])? {
                    multiplicative = Some(format!("[{m}] o [{n}] at {d}"));
                }
            }
            if additive.is_some() && multiplicative.is_some() {
                break 'outer;
            }
        }
    }
    certs.insert("additive".into(), Check::clean(additive));
    certs.insert("multiplicative".into(), Check::clean(multiplicative));
    Ok(())
}

fn level_of(s: &Scenario, law: &FormalGroupLaw) -> anyhow::Result<LevelStructure> {
    Ok(level::level_ring(&s.group_a()?, law)?)
}

fn level_task(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let level = level_of(s, law)?;
    let cond = level::check_level_conditions(&level)?;
    out.insert("level_ring".into(), json!(level.ring.describe()));
    out.insert("rank".into(), json!(level.ring.rank() / law.ring().rank()));
    let points: BTreeMap<String, String> =
        level.group.elements().iter().map(|a| (element_name(a), level.point(a).to_text())).collect();
    out.insert("points".into(), json!(points));
    certs.insert("condition_a".into(), Check::new(cond.a, None));
    certs.insert("condition_b".into(), Check::new(cond.b, None));
    certs.insert("condition_c".into(), Check::new(cond.c, cond.c_remainder.clone()));
    certs.insert("condition_d".into(), Check::new(cond.d, None));
    certs.insert("condition_a_lift".into(), Check::new(cond.a_lift, None));
    certs.insert("condition_d_lift".into(), Check::new(cond.d_lift, None));
    Ok(())
}

fn discriminant(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let level = level_of(s, law)?;
    let d = level::discriminant_check(&level, s.m)?;
    out.insert("delta".into(), json!(d.delta.to_text()));
    out.insert("rhs".into(), json!(d.rhs.to_text()));
    out.insert("unit".into(), json!(d.unit.to_text()));
    let holds = d.unit.is_unit() && d.unit.mul(&d.rhs)? == d.delta;
    certs.insert("identity".into(), Check::new(holds, None));
    let detail = d.is_degenerate().then(|| "right-hand side vanishes; identity is vacuous".to_string());
    certs.insert("nondegenerate".into(), Check::new(!d.is_degenerate(), detail));
    Ok(())
}

fn char_injectivity(law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let r = level::verify_char_injectivity(law)?;
    out.insert("height".into(), json!(r.height));
    out.insert("size".into(), json!(r.size));
    out.insert("kernel_size".into(), json!(r.kernel_size));
    out.insert("valuations".into(), json!(r.valuations));
    let detail = (r.kernel_size > 0).then(|| format!("{} kernel generators", r.kernel_size));
    certs.insert("kernel_empty".into(), Check::new(r.injective(), detail));
    certs.insert("lift_injective".into(), Check::new(r.lift_injective, None));
    Ok(())
}

fn isogeny_of(s: &Scenario, law: &FormalGroupLaw) -> anyhow::Result<Isogeny> {
    Ok(isogeny::quotient_fgl(&level_of(s, law)?, s.cap)?)
}

fn quotient(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let q = isogeny_of(s, law)?;
    let cap = s.cap;
    let phi = q.phi_at(cap)?;
    out.insert("level_ring".into(), json!(q.ring().describe()));
    out.insert("degree".into(), json!(q.degree()));
    out.insert("phi".into(), text(&phi, cap));
    out.insert("phi_wdeg".into(), json!(phi.wdeg()?));
    out.insert("target_law".into(), text(q.target.law(), cap));
    out.insert("target_exact".into(), json!(q.target.law().is_exact()));
    out.insert("target_in_base".into(), json!(q.certificate.target_in_base));
    let n_series = q.source.n_series(q.degree() as i64, cap)?;
    let phi_vs = phi.first_difference(&n_series)?;
    out.insert("phi_equals_n_series".into(), json!(phi_vs.is_none()));
    let source_vs = q.target.law().first_difference(q.source.law())?;
    out.insert("target_equals_source".into(), json!(source_vs.is_none()));
    let c = &q.certificate;
    certs.insert("homomorphism".into(), Check::new(c.homomorphism, c.homomorphism_defect.clone()));
    certs.insert("kernel".into(), Check::new(c.kernel, None));
    certs.insert("degree".into(), Check::new(c.degree, None));
    certs.insert("target_axioms".into(), Check::new(c.target_axioms, None));
    Ok(())
}

fn stagewise(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let level = level_of(s, law)?;
    let b = s.b.unwrap_or(s.p);
    let r = isogeny::stagewise_quotient(&level, b, s.cap)?;
    out.insert("direct_phi".into(), text(&r.direct.phi_at(s.cap)?, s.cap));
    out.insert("composite_phi".into(), text(&r.composite_phi, s.cap));
    certs.insert("phi_agree".into(), diff(r.phi_discrepancy));
    certs.insert("law_agree".into(), diff(r.law_discrepancy));
    Ok(())
}

fn psi(s: &Scenario) -> anyhow::Result<Psi> {
    Ok(s.psi.as_deref().unwrap_or("id").parse()?)
}

fn coherence_coord(
    s: &Scenario,
    law: &FormalGroupLaw,
    out: &mut Outputs,
    certs: &mut Certificates,
) -> anyhow::Result<()> {
    let q = isogeny_of(s, law)?;
    let sec = s.section(law.ring())?.embed(q.ring())?;
    let r = isogeny::coordinate_norm_coherence(&sec, &q, &psi(s)?, s.cap)?;
    out.insert("lhs".into(), text(&r.lhs, s.cap));
    out.insert("rhs".into(), text(&r.rhs, s.cap));
    out.insert("target_is_psi_source".into(), json!(r.target_is_psi_source));
    certs.insert("equal".into(), diff(r.discrepancy));
    Ok(())
}

fn theta_certs(t: &ThetaStructure, cap: usize, prefix: &str, certs: &mut Certificates) -> anyhow::Result<()> {
    let c = theta::check_theta_structure(t, cap)?;
    let detail = |ok: bool| if ok { None } else { c.defect.clone() };
    certs.insert(format!("{prefix}rigid"), Check::new(c.rigid, detail(c.rigid)));
    certs.insert(format!("{prefix}symmetric"), Check::new(c.symmetric, detail(c.symmetric)));
    certs.insert(format!("{prefix}cocycle"), Check::new(c.cocycle, detail(c.cocycle)));
    Ok(())
}

fn theta_check(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let k = s.theta_k()?;
    let cap = s.cap;
    let ring = law.ring();
    let t = match &s.unit {
        Some(u) => ThetaStructure::new(law, MPSeries::parse(ring, k, None, u)?)?,
        None => theta::theta_of_coordinate(law, &s.section(ring)?, k, cap)?,
    };
    out.insert("u".into(), text(&t.u, cap));
    theta_certs(&t, cap, "", certs)?;
    if s.unit.is_none() && k < 3 {
        // Delta of the structure of s against the structure of s one level up.
        let next = theta::theta_of_coordinate(law, &s.section(ring)?, k + 1, cap)?;
        let d = theta::delta_op(&t, cap)?;
        certs.insert("delta_identity".into(), diff(d.u.truncate(cap).first_difference(&next.u.truncate(cap))?));
    }
    Ok(())
}

/// `Theta^k(s)` on the source of `q`, known well enough to be normed to `cap`.
fn source_structure(s: &Scenario, q: &Isogeny, law: &FormalGroupLaw) -> anyhow::Result<ThetaStructure> {
    let k = s.theta_k()?;
    let sec = s.section(law.ring())?.embed(q.ring())?;
    let inc = theta::rnorm_input_cap(q, s.cap)?;
    Ok(theta::theta_of_coordinate(&q.source, &sec, k, inc)?)
}

fn rnorm(s: &Scenario, law: &FormalGroupLaw, out: &mut Outputs, certs: &mut Certificates) -> anyhow::Result<()> {
    let cap = s.cap;
    let q = isogeny_of(s, law)?;
    let t = source_structure(s, &q, law)?;
    theta_certs(&t, cap, "input_", certs)?;
    let normed = match theta::rnorm(&t, &q, cap) {
        Ok(n) => n,
        Err(Error::NotInvariant(at)) => {
            certs.insert("descends".into(), Check::new(false, Some(at)));
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    certs.insert("descends".into(), Check::new(true, None));
    out.insert("u_prime".into(), text(&normed.u, cap));
    out.insert("u_prime_exact".into(), json!(normed.u.is_exact()));
    theta_certs(&normed, cap, "output_", certs)?;
    let along_last = theta::rnorm_along(&t, &q, t.k - 1, cap)?;
    certs.insert("n1_n2_agree".into(), diff(along_last.u.first_difference(&normed.u)?));
    // The norm of Theta^k(x g) is Theta^k of the norm of g on the target.
    let g = s.section(law.ring())?.embed(q.ring())?.shift_down(1)?;
    let inc = theta::rnorm_input_cap(&q, cap)?;
    let ng = isogeny::norm_function(&g.at_cap(inc)?, &q, cap)?;
    let direct = theta::theta_of_function(&q.target, &ng, t.k, cap)?;
    certs.insert("theta_of_norm".into(), diff(normed.u.truncate(cap).first_difference(&direct.truncate(cap))?));
    Ok(())
}

fn coherence_theta(
    s: &Scenario,
    law: &FormalGroupLaw,
    out: &mut Outputs,
    certs: &mut Certificates,
) -> anyhow::Result<()> {
    let q = isogeny_of(s, law)?;
    let t = source_structure(s, &q, law)?;
    let r = theta::norm_coherence_theta(&t, &q, &psi(s)?, s.cap)?;
    out.insert("norm".into(), text(&r.norm.u, s.cap));
    out.insert("pulled".into(), text(&r.pulled, s.cap));
    out.insert("target_is_psi_source".into(), json!(r.target_is_psi_source));
    certs.insert("equal".into(), diff(r.discrepancy));
    Ok(())
}

pub(crate) fn validate(s: &Scenario) -> anyhow::Result<()> {
    if s.cap == 0 {
        bail!("D must be positive");
    }
    Ok(())
}
