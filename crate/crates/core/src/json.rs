//! JSON encodings of polynomials, operators and flow values.
//!
//! ```text
//! DiffPoly  {"terms":[{"c":{"re":"p/q","im":"r/s"},"m":[["u",p,q,pow] | ["v",m,n,0,pow] | ["w",l,0,k,pow]]}]}
//! PsiDO     {"orientation":"d1"|"d2","precision":μ|null,"terms":[{"main":i,"aux":j,"coeff":DiffPoly}]}
//! FlowValue {"i":1|2|"reduced","n":n,"values":{"u":DiffPoly,"v0":DiffPoly,…}}
//! ```
//!
//! `precision: null` marks an exact operator.

use serde_json::{json, Map, Value};

use crate::diffalg::{Axis, DiffPoly, Gen, Jet, Monomial};
use crate::error::{Error, Result};
use crate::hierarchy::{FlowKind, FlowValue};
use crate::psido::PsiDO;
use crate::scalar::Scalar;

fn bad(what: &str) -> Error {
    Error::Parse(format!("malformed JSON: {what}"))
}

fn factor_json(j: &Jet, pow: u32) -> Value {
    match j.gen() {
        Gen::U => json!(["u", j.d1(), j.d2(), pow]),
        Gen::V(m) => json!(["v", m, j.d1(), 0, pow]),
        Gen::W(l) => json!(["w", l, 0, j.d2(), pow]),
    }
}

pub fn poly_to_json(p: &DiffPoly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| {
            let f: Vec<Value> = m.factors().iter().map(|(j, e)| factor_json(j, *e)).collect();
            json!({"c": {"re": c.re_string(), "im": c.im_string()}, "m": f})
        })
        .collect();
    json!({ "terms": terms })
}

fn uint(v: &Value) -> Result<u32> {
    v.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or_else(|| bad("expected a nonnegative integer"))
}

fn factor_from_json(v: &Value) -> Result<(Jet, u32)> {
    let a = v.as_array().ok_or_else(|| bad("factor is not an array"))?;
    let kind = a.first().and_then(Value::as_str).ok_or_else(|| bad("factor kind"))?;
    let nums: Vec<u32> = a[1..].iter().map(uint).collect::<Result<_>>()?;
    let (jet, pow) = match (kind, nums.as_slice()) {
        ("u", [p, q, pow]) => (Jet::u(*p, *q), *pow),
        ("v", [m, n, 0, pow]) => (Jet::v(*m, *n), *pow),
        ("w", [l, 0, k, pow]) => (Jet::w(*l, *k), *pow),
        _ => return Err(bad("factor shape")),
    };
    if pow == 0 {
        return Err(bad("zero power"));
    }
    Ok((jet, pow))
}

pub fn poly_from_json(v: &Value) -> Result<DiffPoly> {
    let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
    let mut out = DiffPoly::zero();
    for t in terms {
        let c = t.get("c").ok_or_else(|| bad("missing c"))?;
        let part = |k: &str| c.get(k).and_then(Value::as_str).ok_or_else(|| bad("scalar part"));
        let s = Scalar::from_parts(part("re")?, part("im")?)?;
        let fs = t.get("m").and_then(Value::as_array).ok_or_else(|| bad("missing m"))?;
        let m = Monomial::from_factors(fs.iter().map(factor_from_json).collect::<Result<Vec<_>>>()?);
        out.add_term(m, &s);
    }
    Ok(out)
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::D1 => "d1",
        Axis::D2 => "d2",
    }
}

pub fn op_to_json(op: &PsiDO) -> Value {
    let terms: Vec<Value> = op
        .terms()
        .map(|(e, c)| json!({"main": e.main, "aux": e.aux, "coeff": poly_to_json(c)}))
        .collect();
    json!({
        "orientation": axis_name(op.main()),
        "precision": op.precision(),
        "terms": terms,
    })
}

pub fn op_from_json(v: &Value) -> Result<PsiDO> {
    let main = match v.get("orientation").and_then(Value::as_str) {
        Some("d1") => Axis::D1,
        Some("d2") => Axis::D2,
        _ => return Err(bad("orientation")),
    };
    let precision = match v.get("precision") {
        None | Some(Value::Null) => None,
        Some(p) => Some(p.as_i64().and_then(|x| i32::try_from(x).ok()).ok_or_else(|| bad("precision"))?),
    };
    let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        let i = t.get("main").and_then(Value::as_i64).and_then(|x| i32::try_from(x).ok());
        let i = i.ok_or_else(|| bad("main exponent"))?;
        let j = uint(t.get("aux").ok_or_else(|| bad("aux exponent"))?)?;
        if precision.is_some_and(|f| i < f) {
            return Err(bad("term below the precision floor"));
        }
        parsed.push((i, j, poly_from_json(t.get("coeff").ok_or_else(|| bad("coeff"))?)?));
    }
    Ok(PsiDO::from_terms(main, parsed, precision))
}

pub fn flow_to_json(fv: &FlowValue) -> Value {
    let i = match fv.kind {
        FlowKind::Side(a) => json!(a.index()),
        FlowKind::Reduced => json!("reduced"),
    };
    let values: Map<String, Value> = fv.values.iter().map(|(g, p)| (g.name(), poly_to_json(p))).collect();
    json!({"i": i, "n": fv.n, "values": values})
}

pub fn flow_from_json(v: &Value) -> Result<FlowValue> {
    let kind = match v.get("i") {
        Some(Value::String(s)) if s == "reduced" => FlowKind::Reduced,
        Some(x) => {
            let a = x.as_u64().and_then(|k| u8::try_from(k).ok()).and_then(Axis::from_index);
            FlowKind::Side(a.ok_or_else(|| bad("flow index"))?)
        }
        None => return Err(bad("missing i")),
    };
    let n = uint(v.get("n").ok_or_else(|| bad("missing n"))?)?;
    let mut fv = FlowValue::new(kind, n);
    let values = v.get("values").and_then(Value::as_object).ok_or_else(|| bad("missing values"))?;
    for (k, p) in values {
        let g = Gen::parse(k).ok_or_else(|| bad("generator name"))?;
        fv.values.insert(g, poly_from_json(p)?);
    }
    Ok(fv)
}
