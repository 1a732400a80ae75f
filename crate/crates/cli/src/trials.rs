//! One function per suite; each runs a single seeded trial.

use poslab_core::crossratio::{cocycle_residual, form_cr, period_with, tensor_cr_check, weight_cr, ProjSample};
use poslab_core::flags::{act, eigenflag, normalized_pairing, pairing, standard_pair};
use poslab_core::numlin;
use poslab_core::photons::{lift, p1_cross_ratio, photon_cr, photon_points, photon_through, supmin_check};
use poslab_core::positivity::{
    bracket_pairing, quadruple_certificate, quadruple_positive, random_rational_element, rational_quadruple,
    sample_cone, sample_loxodromic_instance, sample_positive_tuple, swap_middle, tuple_positive,
};
use poslab_core::replab::{
    collar_terms, hyperbolic_baseline, hitchin_rep, linked, maximal_rep, principal_rep, sample_hyperbolic_pair,
    sextuple, Rep,
};
use poslab_core::{Error, Family, Flag, Group, GroupSpec, Quadruple, Rational, Result, Scalar, WeightForm};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::Suite;

/// Trace range for sampled Fricke pairs in the collar suites.
pub const COLLAR_TRACES: (f64, f64) = (2.85, 5.0);

/// Narrower range for SO: its circle flags pair like a high power of the distance between
/// fixed points, and wide pairs fall under the transversality guard.
pub const COLLAR_TRACES_SO: (f64, f64) = (2.85, 3.6);

/// Minimum normalized pairing for a sampled tuple to count as admissible.
const ADMISSIBLE: f64 = 1e-3;

/// Minimum normalized pairing of an auxiliary flag with the fixed flags of `g`.
const AUX_GENERIC: f64 = 0.05;

pub struct Trial<'a> {
    pub spec: &'a GroupSpec,
    pub tol: f64,
    pub exact: bool,
    pub index: usize,
    pub rng: ChaCha8Rng,
    inputs: Map<String, Value>,
}

impl<'a> Trial<'a> {
    pub fn new(spec: &'a GroupSpec, tol: f64, exact: bool, index: usize, rng: ChaCha8Rng) -> Self {
        Trial { spec, tol, exact, index, rng, inputs: Map::new() }
    }

    fn record(&mut self, key: &str, v: Value) {
        self.inputs.insert(key.to_string(), v);
    }

    pub fn into_inputs(self) -> Value {
        Value::Object(self.inputs)
    }

    /// Root cycled through by trial index.
    fn theta(&self) -> usize {
        let th = self.spec.theta();
        th[self.index % th.len()]
    }
}

pub struct Check {
    pub pass: bool,
    pub margin: f64,
    pub note: String,
}

impl Check {
    /// Passes when `value < threshold`.
    fn below(value: f64, threshold: f64, note: String) -> Check {
        Check { pass: value < threshold, margin: threshold - value, note }
    }
}

pub type TrialFn = fn(&mut Trial) -> Result<Check>;

pub fn dispatch(suite: Suite) -> TrialFn {
    match suite {
        Suite::Cocycle => cocycle,
        Suite::Tensor => tensor,
        Suite::PeriodCharacter => period_character,
        Suite::TheoremA => theorem_a,
        Suite::PhotonPower => photon_power,
        Suite::PhotonFiber => photon_fiber,
        Suite::Bracket => bracket,
        Suite::Supmin => supmin,
        Suite::Collar => collar,
        Suite::BaselineHyperbolic => baseline_hyperbolic,
        Suite::CheckerVsSampler => checker_vs_sampler,
        Suite::ExactParity => exact_parity,
    }
}

fn flags_json<T: Scalar>(fs: &[Flag<T>]) -> Value {
    Value::Array(fs.iter().map(Flag::to_json).collect())
}

fn random_flag(spec: &GroupSpec, rng: &mut ChaCha8Rng) -> Result<Flag<f64>> {
    let (_, em) = standard_pair::<f64>(spec);
    act(&spec.random_element(rng, 1.0), &em)
}

/// `eta` values paired against `theta`: `omega_theta`, `2 omega_theta` and
/// `omega_theta + omega_sigma` for every other root `sigma`.
fn etas(spec: &GroupSpec, theta: usize) -> Vec<WeightForm> {
    let mut out = vec![WeightForm::fundamental(theta), WeightForm::new([(theta, 2.0)]).expect("positive")];
    for &s in spec.theta().iter().filter(|&&s| s != theta) {
        out.push(WeightForm::new([(theta, 1.0), (s, 1.0)]).expect("positive"));
    }
    out
}

/// Every first-slot flag pairs nondegenerately with every opposite-slot flag.
fn admissible(spec: &GroupSpec, xs: &[Flag<f64>], opp: &[Flag<f64>], min: f64) -> Result<bool> {
    for x in xs {
        for o in opp {
            for &t in spec.theta() {
                if normalized_pairing(t, x, o)?.abs() < min {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn cocycle(t: &mut Trial) -> Result<Check> {
    if t.exact {
        return cocycle_exact(t);
    }
    let spec = t.spec.clone();
    for _ in 0..100 {
        let fs: Vec<Flag<f64>> = (0..6).map(|_| random_flag(&spec, &mut t.rng)).collect::<Result<_>>()?;
        if !admissible(&spec, &fs[..3], &fs[3..], ADMISSIBLE)? {
            continue;
        }
        t.record("flags", flags_json(&fs));
        let (r1, r2) = cocycle_residual(&fs[0], &fs[1], &fs[2], &fs[3], &fs[4], &fs[5])?;
        return Ok(Check::below(r1.max(r2), 1e-10, format!("residuals {r1:.3e} {r2:.3e}")));
    }
    Err(Error::Exhausted(100))
}

fn cocycle_exact(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let (_, em) = standard_pair::<Rational>(&spec);
    'draw: for _ in 0..100 {
        let mut fs = Vec::with_capacity(6);
        for _ in 0..6 {
            fs.push(act(&random_rational_element(&spec, &mut t.rng)?, &em)?);
        }
        for x in &fs[..3] {
            for o in &fs[3..] {
                for &th in spec.theta() {
                    if pairing(th, x, o)?.is_negligible(0.0) {
                        continue 'draw;
                    }
                }
            }
        }
        t.record("flags", flags_json(&fs));
        let b = |th: usize, a: &Flag<Rational>, b: &Flag<Rational>, c: &Flag<Rational>, d: &Flag<Rational>| {
            weight_cr(th, &Quadruple::new(a.clone(), b.clone(), c.clone(), d.clone())?)
        };
        let mut worst = 0.0f64;
        for &th in spec.theta() {
            let full = b(th, &fs[0], &fs[2], &fs[3], &fs[5])?;
            let l1 = b(th, &fs[0], &fs[1], &fs[3], &fs[5])? * b(th, &fs[1], &fs[2], &fs[3], &fs[5])?;
            let l2 = b(th, &fs[0], &fs[2], &fs[3], &fs[4])? * b(th, &fs[0], &fs[2], &fs[4], &fs[5])?;
            for l in [l1, l2] {
                worst = worst.max((l / full.clone() - <Rational as Scalar>::from_i64(1)).abs_f64());
            }
        }
        return Ok(Check::below(worst, 1e-10, format!("exact residual {worst:e}")));
    }
    Err(Error::Exhausted(100))
}

/// `|sum a_i b_i| / sum |a_i b_i|`; small values mean heavy cancellation.
fn conditioning(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let m: f64 = a.iter().zip(b).map(|(x, y)| (x * y).abs()).sum();
    s.abs() / m
}

fn tensor(t: &mut Trial) -> Result<Check> {
    for _ in 0..100 {
        let d1 = t.rng.random_range(2..=4);
        let d2 = t.rng.random_range(2..=4);
        let e1 = ProjSample::random(&mut t.rng, d1);
        let e2 = ProjSample::random(&mut t.rng, d2);
        let ok = [&e1, &e2].iter().all(|e| {
            [(&e.x, &e.cx), (&e.y, &e.cy), (&e.y, &e.cx), (&e.x, &e.cy)].iter().all(|(u, v)| conditioning(u, v) >= 0.05)
        });
        if !ok {
            continue;
        }
        let sample = |e: &ProjSample| json!({"x": e.x, "y": e.y, "X": e.cx, "Y": e.cy});
        t.record("factors", json!([sample(&e1), sample(&e2)]));
        let b = e1.cr()? * e2.cr()?;
        let r = tensor_cr_check(&e1, &e2)? / b.abs().max(1.0);
        return Ok(Check::below(r, 1e-12, format!("dims {d1}x{d2}, residual {r:.3e}")));
    }
    Err(Error::Exhausted(100))
}

fn period_character(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let th = t.theta();
    let all = WeightForm::new(spec.theta().iter().map(|&s| (s, 1.0)))?;
    let forms = [WeightForm::fundamental(th), all];
    let known = t.index % 2 == 0;
    let (g, expected, threshold) = if known {
        let (g, a) = spec.random_loxodromic(&mut t.rng, 0.25)?;
        let inv = spec.inverse_cartan(&a);
        t.record("cartan", json!(a));
        let e: Vec<f64> = forms.iter().map(|f| spec.character_at(f, &a) * spec.character_at(f, &inv)).collect();
        (g, e, 1e-12)
    } else {
        let mut found = None;
        for _ in 0..2000 {
            let g = spec.random_element(&mut t.rng, 1.0);
            if spec.loxodromic_coords(&g, t.tol).is_ok() {
                found = Some(g);
                break;
            }
        }
        let g = found.ok_or(Error::Exhausted(2000))?;
        let gi = numlin::inverse(&g)?;
        let e = forms
            .iter()
            .map(|f| Ok(spec.character(f, &g, t.tol)? * spec.character(f, &gi, t.tol)?))
            .collect::<Result<Vec<f64>>>()?;
        (g, e, 1e-8)
    };
    t.record("g", g.to_json());
    let (plus, minus) = eigenflag(&spec, &g, t.tol)?;
    let mut aux = None;
    for _ in 0..100 {
        let y = random_flag(&spec, &mut t.rng)?;
        if admissible(&spec, &[plus.clone(), minus.clone()], std::slice::from_ref(&y), if known { AUX_GENERIC } else { ADMISSIBLE })? {
            aux = Some(y);
            break;
        }
    }
    let aux = aux.ok_or(Error::Exhausted(100))?;
    t.record("aux", aux.to_json());
    let mut worst = 0.0f64;
    for (f, e) in forms.iter().zip(&expected) {
        let p = period_with(f, &g, &plus, &minus, &aux)?;
        worst = worst.max((p / e - 1.0).abs());
    }
    let kind = if known { "known spectrum" } else { "generic" };
    Ok(Check::below(worst, threshold, format!("{kind}, residual {worst:.3e}")))
}

/// Checks `b^{omega_theta} > 1` and `b^eta >= (b^{omega_theta})^{<h_theta|eta>}` for all
/// roots on a quadruple already known to be positive.
fn cross_ratio_bounds<T: Scalar>(spec: &GroupSpec, q: &Quadruple<T>) -> Result<Check> {
    let mut margin = f64::INFINITY;
    let mut pass = true;
    let mut note = String::new();
    for &th in spec.theta() {
        let b = weight_cr(th, q)?;
        let above = if T::EXACT { b > T::one() } else { b.to_f64() > 1.0 };
        pass &= above;
        let bf = b.to_f64();
        margin = margin.min(bf - 1.0);
        for eta in etas(spec, th).iter().skip(1) {
            let lhs = form_cr(eta, q)?;
            let rhs = bf.powf(eta.pairing_h(th));
            if !(lhs >= rhs * (1.0 - 1e-9)) {
                pass = false;
                note = format!("root {th}: b^eta {lhs:e} below bound {rhs:e}");
            }
        }
        if !above {
            note = format!("root {th}: cross-ratio {bf:e} not above 1");
        }
    }
    if pass {
        note = format!("min b - 1 = {margin:.3e}");
    }
    Ok(Check { pass, margin, note })
}

fn theorem_a(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    if t.exact {
        let q = rational_quadruple(&spec, &mut t.rng)?;
        t.record("quadruple", flags_json(&q));
        if !quadruple_positive(&q[0], &q[1], &q[2], &q[3], 0.0)? {
            return Ok(Check { pass: false, margin: f64::NAN, note: "sampled quadruple not certified".into() });
        }
        let [a, b, c, d] = q;
        return cross_ratio_bounds(&spec, &Quadruple::new(a, b, c, d)?);
    }
    let q = sample_positive_tuple(&spec, 4, &mut t.rng)?;
    t.record("quadruple", flags_json(&q));
    if spec.family() != Family::SO && !quadruple_positive(&q[0], &q[1], &q[2], &q[3], t.tol)? {
        return Ok(Check { pass: false, margin: f64::NAN, note: "sampled quadruple not certified".into() });
    }
    let mut it = q.into_iter();
    let mut next = || it.next().expect("four flags");
    cross_ratio_bounds(&spec, &Quadruple::new(next(), next(), next(), next())?)
}

/// Three distinct points of `P^1 \ {inf}` at least 0.1 apart.
fn spread_points(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        if (p[0] - p[1]).abs() > 0.1 && (p[1] - p[2]).abs() > 0.1 && (p[0] - p[2]).abs() > 0.1 {
            return p;
        }
    }
}

fn photon_power(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let th = t.theta();
    let phi = photon_through(&spec, th, &spec.random_element(&mut t.rng, 0.5))?;
    t.record("photon", phi.to_json());
    let [a, c, d] = spread_points(&mut t.rng).map(Some);
    let c0 = lift(&phi, c, &mut t.rng)?;
    let d0 = lift(&phi, d, &mut t.rng)?;
    t.record("points", json!({"a": a, "b": null, "c": c, "d": d}));
    t.record("lifts", flags_json(&[c0.clone(), d0.clone()]));
    let pr = p1_cross_ratio(a, None, c, d)?;
    let mut worst = 0.0f64;
    for eta in etas(&spec, th) {
        let v = photon_cr(&phi, &eta, a, None, &c0, &d0)?;
        worst = worst.max((v / pr.powf(eta.pairing_h(th)) - 1.0).abs());
    }
    Ok(Check::below(worst, 1e-9, format!("root {th}, residual {worst:.3e}")))
}

fn photon_fiber(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let th = t.theta();
    let phi = photon_through(&spec, th, &spec.random_element(&mut t.rng, 0.5))?;
    t.record("photon", phi.to_json());
    let [a, c, d] = spread_points(&mut t.rng).map(Some);
    let d0 = lift(&phi, d, &mut t.rng)?;
    let d1 = lift(&phi, d, &mut t.rng)?;
    t.record("points", json!({"a": a, "c": c, "d": d}));
    t.record("lifts", flags_json(&[d0.clone(), d1.clone()]));
    let q = Quadruple::new(photon_points(&phi, a)?, photon_points(&phi, c)?, d0, d1)?;
    let mut worst = 0.0f64;
    for eta in etas(&spec, th) {
        worst = worst.max((form_cr(&eta, &q)? - 1.0).abs());
    }
    Ok(Check::below(worst, 1e-9, format!("root {th}, residual {worst:.3e}")))
}

fn bracket(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let th = t.theta();
    let mut forms = etas(&spec, th);
    let eta = forms.swap_remove((t.index / spec.theta().len()) % forms.len());
    let u = sample_cone(&spec, th, false, &mut t.rng)?;
    let v = sample_cone(&spec, th, true, &mut t.rng)?;
    t.record("root", json!(th));
    t.record("eta", json!(eta));
    t.record("u", json!(u.coords));
    t.record("v", json!(v.coords));
    // SL root spaces are lines: [u, v] projects to t s h_theta
    let split = spec.family() == Family::SL;
    if t.exact {
        let ex = |c: &poslab_core::ConeVector<f64>| -> Result<poslab_core::ConeVector<Rational>> {
            let coords = c
                .coords
                .iter()
                .map(|&x| <Rational as Scalar>::from_f64(x).ok_or_else(|| Error::Domain("non-finite cone coordinate".into())))
                .collect::<Result<Vec<_>>>()?;
            poslab_core::ConeVector::new(&spec, th, c.negative, coords)
        };
        let (ur, vr) = (ex(&u)?, ex(&v)?);
        let p = bracket_pairing(&spec, &ur, &vr, &eta)?;
        let mut pass = p.is_pos(0.0);
        let mut note = format!("pairing {:.6e}", p.to_f64());
        if split {
            let want = ur.coords[0].clone() * vr.coords[0].clone() * <Rational as Scalar>::from_f64(eta.pairing_h(th)).expect("finite");
            if p != want {
                pass = false;
                note = format!("pairing {} differs from t s <h|eta> = {}", p, want);
            }
        }
        return Ok(Check { pass, margin: p.to_f64(), note });
    }
    let p = bracket_pairing(&spec, &u, &v, &eta)?;
    let mut pass = p > 0.0;
    let mut note = format!("pairing {p:.6e}");
    if split {
        let want = u.coords[0] * v.coords[0] * eta.pairing_h(th);
        let r = (p / want - 1.0).abs();
        if r > 1e-12 {
            pass = false;
            note = format!("pairing {p:e} differs from t s <h|eta> = {want:e}");
        }
    }
    Ok(Check { pass, margin: p, note })
}

fn supmin(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let th = t.theta();
    let mut forms = etas(&spec, th);
    let eta = forms.swap_remove((t.index / spec.theta().len()) % forms.len());
    let inst = sample_loxodromic_instance(&spec, &mut t.rng)?;
    t.record("g", inst.g.to_json());
    t.record("x", inst.x.to_json());
    t.record("root", json!(th));
    t.record("eta", json!(eta));
    let r = supmin_check(&spec, &eta, &inst.g, &inst.x, th, 4, t.tol, &mut t.rng)?;
    let rel = r.margin / r.character;
    let pass = rel >= -1e-8 && r.equality_residual < 1e-8;
    let note = format!("relative margin {rel:.3e}, equality residual {:.3e}", r.equality_residual);
    Ok(Check { pass, margin: rel, note })
}

fn lifted_rep(t: &mut Trial) -> Result<Rep> {
    let spec = t.spec.clone();
    let range = if spec.family() == Family::SO { COLLAR_TRACES_SO } else { COLLAR_TRACES };
    let pair = sample_hyperbolic_pair(&mut t.rng, range)?;
    t.record("pair", pair.to_json());
    match spec.group() {
        Group::SL { n } if spec.theta().len() == n - 1 => hitchin_rep(&pair, n),
        Group::Sp { n } if t.index % 2 == 0 => maximal_rep(&pair, n),
        _ => principal_rep(&pair, &spec),
    }
}

fn collar(t: &mut Trial) -> Result<Check> {
    let rep = lifted_rep(t)?;
    t.record("rep", rep.to_json());
    let spec = rep.spec.clone();
    let sx = sextuple(&rep, "a", "b", t.tol)?;
    if !sx.verdict.holds() {
        return Ok(Check { pass: false, margin: f64::NAN, note: "sextuple not positive".into() });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut at = String::new();
    for &th in spec.theta() {
        for eta in etas(&spec, th) {
            let r = collar_terms(&rep, "a", "b", th, &eta, t.tol)?.residual();
            if r > worst {
                worst = r;
                at = format!("root {th}, eta {}", serde_json::to_string(&eta).expect("json"));
            }
        }
    }
    Ok(Check::below(worst, 1.0, format!("max residual {worst:.6} at {at} ({})", rep.source.embedding)))
}

fn baseline_hyperbolic(t: &mut Trial) -> Result<Check> {
    let pair = sample_hyperbolic_pair(&mut t.rng, COLLAR_TRACES)?;
    t.record("pair", pair.to_json());
    if !linked(&pair.a, &pair.b)? {
        return Ok(Check { pass: false, margin: f64::NAN, note: "axes not linked".into() });
    }
    let s = hyperbolic_baseline(&pair)?;
    Ok(Check { pass: s > 1.0, margin: s - 1.0, note: format!("sinh product {s:.6}") })
}

fn checker_vs_sampler(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    let k = 4 + t.index % 3;
    let tuple = sample_positive_tuple(&spec, k, &mut t.rng)?;
    t.record("tuple", flags_json(&tuple));
    let q: [Flag<f64>; 4] = std::array::from_fn(|i| tuple[i].clone());
    let sw = swap_middle(&q);
    let cert = quadruple_certificate(&q[0], &q[1], &q[2], &q[3], t.tol)?;
    let mut problems = Vec::new();
    if !tuple_positive(&tuple, t.tol)? {
        problems.push(format!("positive {k}-tuple rejected"));
    }
    if quadruple_positive(&sw[0], &sw[1], &sw[2], &sw[3], t.tol)? {
        problems.push("swapped quadruple accepted".to_string());
    }
    let mut conj = Vec::new();
    for i in 0..5 {
        let g = spec.random_element(&mut t.rng, 1.0);
        conj.push(g.to_json());
        let gt = tuple.iter().map(|f| act(&g, f)).collect::<Result<Vec<_>>>()?;
        let gs = sw.iter().map(|f| act(&g, f)).collect::<Result<Vec<_>>>()?;
        if !tuple_positive(&gt, t.tol)? {
            problems.push(format!("conjugate {i} of positive tuple rejected"));
        }
        if quadruple_positive(&gs[0], &gs[1], &gs[2], &gs[3], t.tol)? {
            problems.push(format!("conjugate {i} of swapped quadruple accepted"));
        }
    }
    t.record("conjugators", Value::Array(conj));
    let note = if problems.is_empty() { format!("{k}-tuple, 5 conjugates") } else { problems.join("; ") };
    Ok(Check { pass: problems.is_empty(), margin: cert.min_value, note })
}

fn exact_parity(t: &mut Trial) -> Result<Check> {
    let spec = t.spec.clone();
    for _ in 0..50 {
        let mut q = rational_quadruple(&spec, &mut t.rng)?;
        let swapped = t.rng.random_bool(0.5);
        if swapped {
            q = swap_middle(&q);
        }
        t.record("quadruple", flags_json(&q));
        t.record("swapped", json!(swapped));
        let qf: Vec<Flag<f64>> = q.iter().map(Flag::to_f64).collect();
        // a pair too close for the float transversality test has no usable margin either
        let cert = match quadruple_certificate(&qf[0], &qf[1], &qf[2], &qf[3], t.tol) {
            Err(Error::NotTransverse(_)) => continue,
            r => r?,
        };
        if cert.min_value.abs() <= 1e-6 {
            continue;
        }
        let exact = quadruple_positive(&q[0], &q[1], &q[2], &q[3], 0.0)?;
        let pass = exact == cert.accepted;
        let note = format!("exact {exact}, float {}, swapped {swapped}", cert.accepted);
        return Ok(Check { pass, margin: cert.min_value.abs(), note });
    }
    Err(Error::Exhausted(50))
}
