use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use hpsig::bordism::{
    boundary_complex, boundary_signature_is_zero, verify_boundary_conditions, verify_cone_identities,
    ComplexWithBoundary,
};
use hpsig::generate::{generate as generate_hp, generate_with_boundary};
use hpsig::hpcomplex::{cone_of_duality, verify_duality, DualityReport, HilbertPoincareComplex};
use hpsig::io::{parse_hpx, parse_profile, parse_smf, write_cwb, write_hpx, write_smf, HpxInstance, SmfInstance};
use hpsig::signature::{check_coincidence, signature as signature_with, Method};
use hpsig::simplicial::{
    bordism_to_cwb, enumerate_and_boundaries, geometry_stats, manifold_signature, subdivide as barycentric,
    to_hp_complex, verify_equivariance,
};
use hpsig::{Error, Result};

/// What a command prints and how it exits.
pub struct Outcome {
    pub code: u8,
    pub text: String,
    pub error: Option<String>,
    pub json: Value,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        e if e.is_degeneracy() => 3,
        _ => 1,
    }
}

impl Outcome {
    fn new(code: u8, text: String, json: Value) -> Self {
        Outcome {
            code,
            text,
            error: None,
            json,
        }
    }

    pub fn from_error(e: Error) -> Self {
        let code = exit_code(&e);
        Outcome {
            code,
            text: String::new(),
            error: Some(e.to_string()),
            json: json!({ "passed": false, "error": e.to_string(), "exit_code": code }),
        }
    }

    /// Write the report; a closed stdout is not an error.
    pub fn print(&self, as_json: bool) {
        let mut out = std::io::stdout().lock();
        if as_json {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&self.json).expect("reports serialise"));
        } else {
            let _ = out.write_all(self.text.as_bytes());
            if let Some(e) = &self.error {
                let _ = writeln!(std::io::stderr(), "error: {e}");
            }
        }
        let _ = out.flush();
    }

    /// Append the error to an existing report.
    fn fail(mut self, e: Error) -> Self {
        self.code = exit_code(&e);
        self.error = Some(e.to_string());
        self.json["passed"] = json!(false);
        self.json["error"] = json!(e.to_string());
        self.json["exit_code"] = json!(self.code);
        self
    }
}

enum Input {
    Hp(HilbertPoincareComplex),
    Cwb(ComplexWithBoundary),
    Manifold(SmfInstance),
}

fn load(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let is_smf = match path.extension().and_then(|e| e.to_str()) {
        Some("smf") => true,
        Some("hpx") => false,
        _ => text.contains("\"facets\""),
    };
    if is_smf {
        return parse_smf(&text).map(Input::Manifold);
    }
    Ok(match parse_hpx(&text)? {
        HpxInstance::Closed(hp) => Input::Hp(hp),
        HpxInstance::WithBoundary(cwb) => Input::Cwb(cwb),
    })
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "ok"
    } else {
        "FAIL"
    }
}

fn residual_line(out: &mut String, name: &str, residual: f64, threshold: f64, passed: bool) {
    let _ = writeln!(out, "  {name:<36} {residual:>10.3e}  (threshold {threshold:.3e})  {}", mark(passed));
}

fn duality_text(r: &DualityReport, dims: &[usize]) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "complex: top degree {}, dims {dims:?}", dims.len() - 1);
    for d in &r.complex.residuals {
        residual_line(&mut t, &format!("b_{} b_{} = 0 (degree {})", d.degree, d.degree + 1, d.degree), d.residual, d.threshold, d.passed);
    }
    residual_line(
        &mut t,
        "S = S*",
        r.self_adjoint_residual,
        r.self_adjoint_threshold,
        r.self_adjoint_residual <= r.self_adjoint_threshold,
    );
    for d in &r.chain_residuals {
        residual_line(&mut t, &format!("b S + S b* = 0 (degree {})", d.degree), d.residual, d.threshold, d.passed);
    }
    let _ = writeln!(
        t,
        "  {:<36} {:>10.3e}  (threshold {:.3e})  {}",
        "min singular value of B_S",
        r.cone_min_singular_value,
        r.cone_threshold,
        if r.cone_invertible { "ok" } else { "SINGULAR" }
    );
    if let Some(eq) = &r.equivariance {
        residual_line(&mut t, "action is a unitary representation", eq.action.unitarity_residual.max(eq.action.homomorphism_residual), eq.threshold, eq.action.passed);
        residual_line(&mut t, "rho b = b rho", eq.differential_residual, eq.threshold, eq.differential_residual <= eq.threshold);
        residual_line(&mut t, "rho S = S rho", eq.duality_residual, eq.threshold, eq.duality_residual <= eq.threshold);
    }
    t
}

fn finish_duality(r: &DualityReport, mut json: Value, mut text: String) -> Outcome {
    json["duality"] = serde_json::to_value(r).unwrap();
    json["passed"] = json!(r.passed);
    match r.failure() {
        Some(e) => Outcome::new(0, text, json).fail(e),
        None => {
            text.push_str("result: PASS\n");
            Outcome::new(0, text, json)
        }
    }
}

pub fn verify(path: &Path, tol: f64) -> Result<Outcome> {
    match load(path)? {
        Input::Hp(hp) => {
            let r = verify_duality(&hp, tol)?;
            let text = duality_text(&r, hp.dims());
            Ok(finish_duality(&r, json!({ "kind": "hilbert-poincare", "dims": hp.dims() }), text))
        }
        Input::Cwb(cwb) => Ok(verify_cwb(&cwb, tol, json!({ "kind": "complex-with-boundary" }))),
        Input::Manifold(inst) if inst.manifold.has_boundary() && !inst.manifold.boundary_ridges().is_empty() => {
            let cwb = bordism_to_cwb(&inst.manifold, tol)?;
            Ok(verify_cwb(&cwb, tol, json!({ "kind": "manifold-with-boundary" })))
        }
        Input::Manifold(inst) => {
            let built = to_hp_complex(&inst.manifold, inst.action.as_ref(), tol)?;
            let dims = built.hp.dims().to_vec();
            let mut text = format!("manifold: dimension {}, {} facets, closed\n", inst.manifold.dim(), inst.manifold.facets().len());
            let _ = writeln!(text, "  {:<36} {:>10.3e}", "cap S - S* before symmetrising", built.symmetrization_residual);
            let mut json = json!({
                "kind": "manifold",
                "symmetrization_residual": built.symmetrization_residual,
            });
            if let Some(a) = &inst.action {
                let data = enumerate_and_boundaries(&inst.manifold);
                let eq = verify_equivariance(&inst.manifold, &data, a, tol)?;
                equivariance_text(&mut text, &eq, tol);
                json["equivariance"] = serde_json::to_value(&eq).unwrap();
            }
            text.push_str(&duality_text(&built.report, &dims));
            Ok(finish_duality(&built.report, json, text))
        }
    }
}

fn equivariance_text(t: &mut String, eq: &hpsig::simplicial::EquivarianceCheck, tol: f64) {
    residual_line(t, "T K_g = rho(g^-1) T (duality used)", eq.residual, tol, eq.residual <= tol);
    let _ = writeln!(
        t,
        "  {:<36} {:>10.3e}  ({})",
        "T K_g = rho(g^-1) T (literal cap)",
        eq.raw_residual,
        if eq.preserves_vertex_order {
            "action preserves the vertex order"
        } else {
            "action does not preserve the vertex order; cap averaged over the group"
        }
    );
    residual_line(t, "rho b = b rho", eq.differential_residual, tol, eq.differential_residual <= tol);
}

fn verify_cwb(cwb: &ComplexWithBoundary, tol: f64, mut json: Value) -> Outcome {
    let r = match verify_boundary_conditions(cwb, tol) {
        Ok(r) => r,
        Err(e) => return Outcome::from_error(e),
    };
    let mut t = String::new();
    let _ = writeln!(
        t,
        "complex with boundary: top degree {}, dims {:?}, boundary dims {:?}",
        cwb.top_degree(),
        cwb.complex().dims(),
        cwb.boundary_dims()
    );
    for d in &r.complex.residuals {
        residual_line(&mut t, &format!("b_{} b_{} = 0 (degree {})", d.degree, d.degree + 1, d.degree), d.residual, d.threshold, d.passed);
    }
    for c in [&r.boundary_preserved, &r.self_adjoint, &r.quotient_chain_condition] {
        residual_line(&mut t, c.identity, c.residual, c.threshold, c.passed);
    }
    let _ = writeln!(t, "  {:<36} {:>10.3e}", "(bS + Sb*) restricted to E0", r.restricted_to_boundary);
    residual_line(
        &mut t,
        "quotient cone min singular value",
        r.quotient_cone_min_singular_value,
        r.quotient_cone_threshold,
        r.quotient_cone_min_singular_value > r.quotient_cone_threshold,
    );
    json["conditions"] = serde_json::to_value(&r).unwrap();
    json["passed"] = json!(r.passed);
    let out = Outcome::new(0, t, json);
    match r.failure() {
        Some(e) => out.fail(e),
        None => {
            let mut out = out;
            out.text.push_str("result: PASS\n");
            out
        }
    }
}

fn closed_hp(input: Input, tol: f64) -> Result<(HilbertPoincareComplex, Value)> {
    match input {
        Input::Hp(hp) => {
            let r = verify_duality(&hp, tol)?;
            if let Some(e) = r.failure() {
                return Err(e);
            }
            Ok((hp, json!({ "kind": "hilbert-poincare" })))
        }
        Input::Manifold(inst) => {
            let built = to_hp_complex(&inst.manifold, inst.action.as_ref(), tol)?;
            Ok((built.hp, json!({ "kind": "manifold", "symmetrization_residual": built.symmetrization_residual })))
        }
        Input::Cwb(_) => Err(Error::PreconditionViolated(
            "the document describes a complex with boundary; use boundary or bordism-check".into(),
        )),
    }
}

pub fn signature(path: &Path, method: Option<Method>, tol: f64) -> Result<Outcome> {
    let (hp, mut json) = closed_hp(load(path)?, tol)?;
    let mut text = String::new();
    match method {
        Some(m) => {
            let r = signature_with(&hp, m, tol)?;
            let _ = writeln!(text, "{:<12} {}", m.name(), r.k0);
            let _ = writeln!(text, "signature: {}", r.k0);
            json["signature"] = serde_json::to_value(&r.k0).unwrap();
            json["results"] = json!([r]);
            json["passed"] = json!(true);
            Ok(Outcome::new(0, text, json))
        }
        None => {
            let report = check_coincidence(&hp, tol)?;
            for r in report.results() {
                let _ = writeln!(text, "{:<12} {}", r.method.name(), r.k0);
            }
            let _ = writeln!(
                text,
                "coincidence: {} (intertwining residual {:.3e})",
                if report.agree { "PASS" } else { "FAIL" },
                report.intertwining_residual
            );
            json["coincidence"] = serde_json::to_value(&report).unwrap();
            let out = Outcome::new(0, text, json);
            match report.clone().into_result() {
                Ok(k0) => {
                    let mut out = out;
                    let _ = writeln!(out.text, "signature: {k0}");
                    out.json["signature"] = serde_json::to_value(&k0).unwrap();
                    out.json["passed"] = json!(true);
                    Ok(out)
                }
                Err(e) => Ok(out.fail(e)),
            }
        }
    }
}

pub fn simplicial(path: &Path, tol: f64) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let inst = parse_smf(&text)?;
    let m = &inst.manifold;
    let stats = geometry_stats(m, inst.action.as_ref());
    let mut t = format!("manifold: dimension {}, f-vector {:?}\n", m.dim(), stats.f_vector);
    let _ = writeln!(t, "  max closed vertex star: {} simplices", stats.max_closed_star);
    let _ = writeln!(t, "  max isotropy: {}", stats.max_isotropy);
    let mut json = json!({ "geometry": stats });
    if let Some(a) = &inst.action {
        let data = enumerate_and_boundaries(m);
        let eq = verify_equivariance(m, &data, a, tol)?;
        equivariance_text(&mut t, &eq, tol);
        json["equivariance"] = serde_json::to_value(&eq).unwrap();
    }
    let sig = manifold_signature(m, inst.action.as_ref(), tol)?;
    let _ = writeln!(t, "  {:<36} {:>10.3e}", "cap S - S* before symmetrising", sig.symmetrization_residual);
    let _ = writeln!(t, "  {:<36} {:>10.3e}", "min singular value of B_S", sig.cone_min_singular_value);
    for r in sig.coincidence.results() {
        let _ = writeln!(t, "{:<12} {}", r.method.name(), r.k0);
    }
    let _ = writeln!(t, "signature: {}", sig.signature);
    json["signature"] = serde_json::to_value(&sig.signature).unwrap();
    json["details"] = serde_json::to_value(&sig).unwrap();
    json["passed"] = json!(true);
    Ok(Outcome::new(0, t, json))
}

fn with_boundary(input: Input, tol: f64) -> Result<ComplexWithBoundary> {
    match input {
        Input::Cwb(cwb) => Ok(cwb),
        Input::Manifold(inst) => bordism_to_cwb(&inst.manifold, tol),
        Input::Hp(_) => Err(Error::PreconditionViolated(
            "the document has no \"boundary_split\"; nothing to restrict to".into(),
        )),
    }
}

pub fn boundary(path: &Path, tol: f64) -> Result<Outcome> {
    let cwb = with_boundary(load(path)?, tol)?;
    let bc = boundary_complex(&cwb, tol)?;
    let summary = bc.summary();
    let mut t = format!("boundary complex: top degree {}, dims {:?}\n", summary.top_degree, summary.dims);
    residual_line(&mut t, "S0 restriction vs closed form", summary.formula_residual, summary.threshold, summary.formula_residual <= summary.threshold);
    residual_line(&mut t, "b0 S0 - S0 b0*", summary.commutation_residual, summary.threshold, summary.commutation_residual <= summary.threshold);
    let mut json = json!({ "boundary": summary, "passed": true });
    if summary.top_degree % 2 == 0 {
        let report = check_coincidence(&bc.hp, tol)?;
        let k0 = report.clone().into_result()?;
        let _ = writeln!(t, "boundary signature: {k0}");
        json["signature"] = serde_json::to_value(&k0).unwrap();
    } else {
        let _ = writeln!(t, "boundary signature: undefined (odd top degree)");
    }
    Ok(Outcome::new(0, t, json))
}

pub fn bordism_check(path: &Path, tol: f64) -> Result<Outcome> {
    let cwb = with_boundary(load(path)?, tol)?;
    let ids = verify_cone_identities(&cwb, tol)?;
    let mut t = String::from("cone identities:\n");
    for c in [&ids.h_squared, &ids.sequence_composition, &ids.chain_map, &ids.sign0] {
        residual_line(&mut t, c.identity, c.residual, c.threshold, c.passed);
    }
    let _ = writeln!(t, "  {:<36} {:>10}  {}", "exactness rank defect", ids.exactness_rank_defect, mark(ids.exactness_rank_defect == 0));
    let report = boundary_signature_is_zero(&cwb, tol)?;
    for r in report.signatures.results() {
        let _ = writeln!(t, "{:<12} {}", r.method.name(), r.k0);
    }
    let passed = report.passed && ids.passed;
    let _ = writeln!(t, "boundary signature zero: {}", if report.passed { "PASS" } else { "FAIL" });
    let json = json!({ "cone_identities": ids, "boundary_signature": report, "passed": passed });
    let out = Outcome::new(if passed { 0 } else { 1 }, t, json);
    let failed = [&ids.h_squared, &ids.sequence_composition, &ids.chain_map, &ids.sign0]
        .into_iter()
        .find(|c| !c.passed);
    Ok(if let Some(c) = failed {
        out.fail(Error::IdentityViolated {
            identity: c.identity,
            residual: c.residual,
        })
    } else if ids.exactness_rank_defect > 0 {
        out.fail(Error::IdentityViolated {
            identity: "exactness of the cone sequence",
            residual: ids.exactness_rank_defect as f64,
        })
    } else if !report.passed {
        out.fail(Error::CoincidenceFailed("boundary signature is not zero".into()))
    } else {
        out
    })
}

pub fn cone(path: &Path, tol: f64) -> Result<Outcome> {
    let hp = match load(path)? {
        Input::Hp(hp) => hp,
        Input::Manifold(inst) => to_hp_complex(&inst.manifold, inst.action.as_ref(), tol)?.hp,
        Input::Cwb(_) => {
            return Err(Error::PreconditionViolated("the cone of S needs a closed complex".into()));
        }
    };
    let cone = cone_of_duality(&hp, tol)?;
    let r = verify_duality(&hp, tol)?;
    let homology = cone.complex.homology_ranks(tol);
    let mut t = format!("cone of S: top degree {}, dims {:?}\n", cone.complex.top_degree(), cone.complex.dims());
    let _ = writeln!(t, "  homology ranks {homology:?}");
    let _ = writeln!(
        t,
        "  {:<36} {:>10.3e}  (threshold {:.3e})  {}",
        "min singular value of B_S",
        r.cone_min_singular_value,
        r.cone_threshold,
        if r.cone_invertible { "acyclic" } else { "SINGULAR" }
    );
    let json = json!({
        "dims": cone.complex.dims(),
        "homology_ranks": homology,
        "min_singular_value": r.cone_min_singular_value,
        "threshold": r.cone_threshold,
        "passed": r.cone_invertible,
    });
    let out = Outcome::new(0, t, json);
    Ok(if r.cone_invertible {
        out
    } else {
        out.fail(Error::DegenerateDuality {
            min_singular_value: r.cone_min_singular_value,
        })
    })
}

fn emit(document: String, out: Option<&Path>, summary: String, mut json: Value) -> Result<Outcome> {
    match out {
        Some(p) => {
            std::fs::write(p, &document).map_err(|e| Error::PreconditionViolated(format!("cannot write {}: {e}", p.display())))?;
            json["written"] = json!(p.display().to_string());
            Ok(Outcome::new(0, format!("{summary}wrote {}\n", p.display()), json))
        }
        None => {
            json["document"] = serde_json::from_str(&document).expect("writer emits JSON");
            Ok(Outcome::new(0, document, json))
        }
    }
}

pub fn generate(seed: u64, profile: &str, boundary: bool, out: Option<&Path>) -> Result<Outcome> {
    let p = parse_profile(profile)?;
    let json = json!({ "seed": seed, "profile": p.to_string(), "passed": true });
    if boundary {
        let cwb = generate_with_boundary(seed, &p);
        let summary = format!("complex with boundary: dims {:?}, boundary dims {:?}\n", cwb.complex().dims(), cwb.boundary_dims());
        emit(write_cwb(&cwb), out, summary, json)
    } else {
        let hp = generate_hp(seed, &p);
        let summary = format!("Hilbert-Poincare complex: dims {:?}\n", hp.dims());
        emit(write_hpx(&hp), out, summary, json)
    }
}

pub fn subdivide(path: &Path, out: Option<&Path>) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let inst = parse_smf(&text)?;
    let (sd, action) = barycentric(&inst.manifold, inst.action.as_ref())?;
    let summary = format!("subdivision: {} vertices, {} facets\n", sd.vertices().len(), sd.facets().len());
    emit(write_smf(&sd, action.as_ref()), out, summary, json!({ "passed": true }))
}
