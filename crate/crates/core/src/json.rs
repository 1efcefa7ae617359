//! JSON forms of the domain values and of the command input documents.
//!
//! Output is canonical: ring terms in group-element order, integer
//! coefficients as JSON numbers when they fit in `i64` and as decimal
//! strings otherwise, rationals as integers or `"p/q"` strings, object keys
//! sorted. Parsing a canonical document and serializing it again reproduces
//! it exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::chains::{BasedComplex, ChainHomotopy, ChainMap, EquivalencePack, GradedMap, Shape};
use crate::groupring::{GroupElement, GroupSpec, RingElement, RingMatrix};
use crate::nilgroups::{UniMatrix, UniSubgroup};
use crate::sullivan::{
    format_rational, parse_rational, Cdga, Derivation, Generator, GradedPoly, HomotopyLine, TPoly, TdtElement,
};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invariant violation: {0}")]
    Invariant(String),
}

pub type InputResult<T> = std::result::Result<T, InputError>;

fn schema(path: &str, message: impl Into<String>) -> InputError {
    InputError::Schema { path: path.to_string(), message: message.into() }
}

pub fn parse_text(text: &str) -> InputResult<Value> {
    serde_json::from_str(text).map_err(|e| InputError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Deterministic pretty output with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> InputResult<&'a Value> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))?
        .get(key)
        .ok_or_else(|| schema(path, format!("missing field \"{key}\"")))
}

fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.as_object().and_then(|o| o.get(key)).filter(|x| !x.is_null())
}

fn array<'a>(v: &'a Value, path: &str) -> InputResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn int(v: &Value, path: &str) -> InputResult<i64> {
    v.as_i64().ok_or_else(|| schema(path, "expected an integer"))
}

fn uint(v: &Value, path: &str) -> InputResult<u64> {
    v.as_u64().ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn big_int(v: &Value, path: &str) -> InputResult<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| schema(path, "expected an integer")),
        Value::String(s) => s.trim().parse().map_err(|_| schema(path, format!("not an integer: {s}"))),
        _ => schema_err(path, "expected an integer or a decimal string"),
    }
}

fn schema_err<T>(path: &str, message: &str) -> InputResult<T> {
    Err(schema(path, message))
}

fn big_int_json(c: &BigInt) -> Value {
    c.to_i64().map_or_else(|| Value::String(c.to_string()), |x| json!(x))
}

/// Checks the optional `"schema"` field of a top-level document.
pub fn check_schema(v: &Value) -> InputResult<()> {
    match opt_field(v, "schema") {
        None => Ok(()),
        Some(s) if s.as_u64() == Some(SCHEMA_VERSION) => Ok(()),
        Some(s) => Err(schema("$.schema", format!("unsupported schema version {s}"))),
    }
}

pub fn group_to_json(s: &GroupSpec) -> Value {
    json!({ "free_rank": s.free_rank, "torsion": s.torsion })
}

pub fn parse_group(v: &Value, path: &str) -> InputResult<Arc<GroupSpec>> {
    let r = uint(field(v, "free_rank", path)?, &format!("{path}.free_rank"))? as usize;
    let t = array(field(v, "torsion", path)?, &format!("{path}.torsion"))?
        .iter()
        .enumerate()
        .map(|(i, x)| uint(x, &format!("{path}.torsion[{i}]")))
        .collect::<InputResult<Vec<_>>>()?;
    GroupSpec::new(r, t).map(Arc::new).map_err(|e| schema(path, e.to_string()))
}

pub fn ring_element_to_json(u: &RingElement) -> Value {
    Value::Array(
        u.terms()
            .iter()
            .map(|(g, c)| {
                let exps: Vec<Value> =
                    g.free.iter().map(|&e| json!(e)).chain(g.torsion.iter().map(|&e| json!(e))).collect();
                json!([exps, big_int_json(c)])
            })
            .collect(),
    )
}

pub fn parse_ring_element(v: &Value, spec: &Arc<GroupSpec>, path: &str) -> InputResult<RingElement> {
    let width = spec.free_rank + spec.torsion.len();
    let mut terms = vec![];
    for (i, t) in array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{i}]");
        let pair = array(t, &tp)?;
        if pair.len() != 2 {
            return schema_err(&tp, "expected [exponents, coefficient]");
        }
        let exps = array(&pair[0], &format!("{tp}[0]"))?;
        if exps.len() != width {
            return Err(schema(&tp, format!("expected {width} exponents, got {}", exps.len())));
        }
        let exps =
            exps.iter().enumerate().map(|(j, e)| int(e, &format!("{tp}[0][{j}]"))).collect::<InputResult<Vec<_>>>()?;
        let g = spec
            .element(exps[..spec.free_rank].to_vec(), exps[spec.free_rank..].to_vec())
            .map_err(|e| schema(&tp, e.to_string()))?;
        terms.push((g, big_int(&pair[1], &format!("{tp}[1]"))?));
    }
    Ok(RingElement::from_terms(spec, terms))
}

pub fn matrix_to_json(m: &RingMatrix) -> Value {
    Value::Array((0..m.rows()).map(|r| Value::Array(m.row(r).iter().map(ring_element_to_json).collect())).collect())
}

pub fn parse_matrix(v: &Value, spec: &Arc<GroupSpec>, rows: usize, cols: usize, path: &str) -> InputResult<RingMatrix> {
    let rs = array(v, path)?;
    if rs.len() != rows {
        return Err(schema(path, format!("expected {rows} rows, got {}", rs.len())));
    }
    let mut m = RingMatrix::zeros(spec, rows, cols);
    for (r, row) in rs.iter().enumerate() {
        let rp = format!("{path}[{r}]");
        let entries = array(row, &rp)?;
        if entries.len() != cols {
            return Err(schema(&rp, format!("expected {cols} entries, got {}", entries.len())));
        }
        for (c, e) in entries.iter().enumerate() {
            m.set(r, c, parse_ring_element(e, spec, &format!("{rp}[{c}]"))?);
        }
    }
    Ok(m)
}

pub fn complex_to_json(c: &BasedComplex) -> Value {
    let s = c.shape();
    json!({
        "group": group_to_json(c.spec()),
        "degrees": [s.lo, s.hi()],
        "ranks": s.ranks,
        "diffs": s.degrees().map(|k| matrix_to_json(&c.diff(k))).collect::<Vec<_>>(),
    })
}

pub fn parse_complex(v: &Value, path: &str) -> InputResult<BasedComplex> {
    let spec = parse_group(field(v, "group", path)?, &format!("{path}.group"))?;
    let dp = format!("{path}.degrees");
    let degrees = array(field(v, "degrees", path)?, &dp)?;
    if degrees.len() != 2 {
        return schema_err(&dp, "expected [lo, hi]");
    }
    let (lo, hi) = (int(&degrees[0], &dp)?, int(&degrees[1], &dp)?);
    let rp = format!("{path}.ranks");
    let ranks = array(field(v, "ranks", path)?, &rp)?
        .iter()
        .enumerate()
        .map(|(i, r)| uint(r, &format!("{rp}[{i}]")).map(|x| x as usize))
        .collect::<InputResult<Vec<_>>>()?;
    if hi - lo + 1 != ranks.len() as i64 {
        return Err(schema(
            &rp,
            format!("degrees [{lo}, {hi}] need {} ranks, got {}", (hi - lo + 1).max(0), ranks.len()),
        ));
    }
    let shape = Shape::new(lo, ranks);
    let fp = format!("{path}.diffs");
    let diffs = array(field(v, "diffs", path)?, &fp)?;
    if diffs.len() != shape.ranks.len() {
        return Err(schema(&fp, format!("expected {} differentials, got {}", shape.ranks.len(), diffs.len())));
    }
    let mats = shape
        .degrees()
        .zip(diffs)
        .map(|(k, m)| parse_matrix(m, &spec, shape.rank(k - 1), shape.rank(k), &format!("{fp}[{}]", k - lo)))
        .collect::<InputResult<Vec<_>>>()?;
    let c = BasedComplex::from_parts(&spec, shape, mats).map_err(|e| schema(path, e.to_string()))?;
    if let Some(k) = c.d_squared_failure() {
        return Err(InputError::Invariant(format!("d_{} o d_{k} is nonzero in {path} (degree {k})", k - 1)));
    }
    Ok(c)
}

pub fn graded_map_to_json(m: &GradedMap) -> Value {
    Value::Array(m.src.degrees().map(|k| matrix_to_json(&m.at(k))).collect())
}

pub fn parse_graded_map(
    v: &Value,
    src: &BasedComplex,
    tgt: &BasedComplex,
    degree: i64,
    path: &str,
) -> InputResult<GradedMap> {
    let comps = array(v, path)?;
    let (s, t) = (src.shape(), tgt.shape());
    if comps.len() != s.ranks.len() {
        return Err(schema(
            path,
            format!("expected one matrix per source degree ({}), got {}", s.ranks.len(), comps.len()),
        ));
    }
    let spec = src.spec().clone();
    let mats = s
        .degrees()
        .zip(comps)
        .map(|(k, m)| parse_matrix(m, &spec, t.rank(k + degree), s.rank(k), &format!("{path}[{}]", k - s.lo)))
        .collect::<InputResult<Vec<_>>>()?;
    let mut it = mats.into_iter();
    GradedMap::from_fn(&spec, degree, s, t, |_| Ok(it.next().expect("one per degree")))
        .map_err(|e| schema(path, e.to_string()))
}

/// `{"f", "g", "h", "k"}` maps; the homotopies default to zero.
pub fn pack_maps_to_json(p: &EquivalencePack) -> Value {
    json!({
        "f": graded_map_to_json(&p.f.map),
        "g": graded_map_to_json(&p.g.map),
        "h": graded_map_to_json(&p.h.map),
        "k": graded_map_to_json(&p.k.map),
    })
}

pub fn parse_pack_maps(
    v: &Value,
    source: &BasedComplex,
    target: &BasedComplex,
    path: &str,
) -> InputResult<EquivalencePack> {
    let f = parse_graded_map(field(v, "f", path)?, source, target, 0, &format!("{path}.f"))?;
    let g = parse_graded_map(field(v, "g", path)?, target, source, 0, &format!("{path}.g"))?;
    let h = match opt_field(v, "h") {
        Some(h) => parse_graded_map(h, target, target, 1, &format!("{path}.h"))?,
        None => target.zero_map(1),
    };
    let k = match opt_field(v, "k") {
        Some(k) => parse_graded_map(k, source, source, 1, &format!("{path}.k"))?,
        None => source.zero_map(1),
    };
    let invariant = |e: crate::Error| InputError::Invariant(format!("{path}: {e}"));
    EquivalencePack::new(
        ChainMap::new(source.clone(), target.clone(), f).map_err(invariant)?,
        ChainMap::new(target.clone(), source.clone(), g).map_err(invariant)?,
        ChainHomotopy { map: h },
        ChainHomotopy { map: k },
    )
    .map_err(invariant)
}

/// Input of `torsion`: an equivalence between two complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionInput {
    pub pack: EquivalencePack,
}

impl TorsionInput {
    pub fn to_json(&self) -> Value {
        let mut v = pack_maps_to_json(&self.pack);
        let o = v.as_object_mut().expect("object");
        o.insert("schema".into(), json!(SCHEMA_VERSION));
        o.insert("source".into(), complex_to_json(&self.pack.f.source));
        o.insert("target".into(), complex_to_json(&self.pack.f.target));
        v
    }

    pub fn parse(v: &Value) -> InputResult<Self> {
        check_schema(v)?;
        let source = parse_complex(field(v, "source", "$")?, "$.source")?;
        let target = match opt_field(v, "target") {
            Some(t) => parse_complex(t, "$.target")?,
            None => source.clone(),
        };
        Ok(TorsionInput { pack: parse_pack_maps(v, &source, &target, "$")? })
    }
}

/// Input of `gersten`: a self-equivalence of one complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GerstenInput {
    pub complex: BasedComplex,
    pub pack: EquivalencePack,
}

impl GerstenInput {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "complex": complex_to_json(&self.complex),
            "pack": pack_maps_to_json(&self.pack),
        })
    }

    pub fn parse(v: &Value) -> InputResult<Self> {
        check_schema(v)?;
        let complex = parse_complex(field(v, "complex", "$")?, "$.complex")?;
        let pack = parse_pack_maps(field(v, "pack", "$")?, &complex, &complex, "$.pack")?;
        Ok(GerstenInput { complex, pack })
    }
}

/// Input of `swindle`: self-equivalences `f`, `g` and `comm` with
/// `d comm + comm d = g f - f g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwindleInput {
    pub complex: BasedComplex,
    pub f: EquivalencePack,
    pub g: EquivalencePack,
    pub comm: ChainHomotopy,
}

impl SwindleInput {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "complex": complex_to_json(&self.complex),
            "f": pack_maps_to_json(&self.f),
            "g": pack_maps_to_json(&self.g),
            "comm": graded_map_to_json(&self.comm.map),
        })
    }

    pub fn parse(v: &Value) -> InputResult<Self> {
        check_schema(v)?;
        let complex = parse_complex(field(v, "complex", "$")?, "$.complex")?;
        let f = parse_pack_maps(field(v, "f", "$")?, &complex, &complex, "$.f")?;
        let g = parse_pack_maps(field(v, "g", "$")?, &complex, &complex, "$.g")?;
        let comm = ChainHomotopy { map: parse_graded_map(field(v, "comm", "$")?, &complex, &complex, 1, "$.comm")? };
        Ok(SwindleInput { complex, f, g, comm })
    }
}

/// Input of `torus`: fiber, monodromy `m`, a self-equivalence `g` and `comm`
/// with `d comm + comm d = g m - m g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusInput {
    pub fiber: BasedComplex,
    pub monodromy: EquivalencePack,
    pub g: EquivalencePack,
    pub comm: ChainHomotopy,
}

impl TorusInput {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "fiber": complex_to_json(&self.fiber),
            "monodromy": pack_maps_to_json(&self.monodromy),
            "g": pack_maps_to_json(&self.g),
            "comm": graded_map_to_json(&self.comm.map),
        })
    }

    pub fn parse(v: &Value) -> InputResult<Self> {
        check_schema(v)?;
        let fiber = parse_complex(field(v, "fiber", "$")?, "$.fiber")?;
        let monodromy = parse_pack_maps(field(v, "monodromy", "$")?, &fiber, &fiber, "$.monodromy")?;
        let g = parse_pack_maps(field(v, "g", "$")?, &fiber, &fiber, "$.g")?;
        let comm = ChainHomotopy { map: parse_graded_map(field(v, "comm", "$")?, &fiber, &fiber, 1, "$.comm")? };
        Ok(TorusInput { fiber, monodromy, g, comm })
    }
}

/// Generators of a unitriangular subgroup: a bare array of integer
/// matrices, or `{"generators": [...]}`.
pub fn parse_generators(v: &Value, size: Option<usize>) -> InputResult<UniSubgroup> {
    let (list, path) = match v {
        Value::Array(_) => (v, "$".to_string()),
        _ => {
            check_schema(v)?;
            (field(v, "generators", "$")?, "$.generators".to_string())
        }
    };
    let mut gens = vec![];
    for (i, g) in array(list, &path)?.iter().enumerate() {
        let gp = format!("{path}[{i}]");
        let rows = array(g, &gp)?
            .iter()
            .enumerate()
            .map(|(r, row)| {
                array(row, &format!("{gp}[{r}]"))?
                    .iter()
                    .enumerate()
                    .map(|(c, x)| int(x, &format!("{gp}[{r}][{c}]")))
                    .collect::<InputResult<Vec<_>>>()
            })
            .collect::<InputResult<Vec<_>>>()?;
        gens.push(UniMatrix::new(rows).map_err(|e| InputError::Invariant(format!("{gp}: {e}")))?);
    }
    let n = match (size, gens.first()) {
        (Some(n), _) => n,
        (None, Some(g)) => g.size(),
        (None, None) => return Err(schema(&path, "no generators and no size given")),
    };
    UniSubgroup::new(n, gens).map_err(|e| schema(&path, e.to_string()))
}

pub fn generators_to_json(s: &UniSubgroup) -> Value {
    json!({ "schema": SCHEMA_VERSION, "generators": s.generators().iter().map(|g| json!(g.entries())).collect::<Vec<_>>() })
}

fn rational_json(q: &num_rational::BigRational) -> Value {
    if q.is_integer() {
        if let Some(x) = q.numer().to_i64() {
            return json!(x);
        }
    }
    Value::String(format_rational(q))
}

fn parse_rational_json(v: &Value, path: &str) -> InputResult<num_rational::BigRational> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|x| num_rational::BigRational::from_integer(x.into()))
            .ok_or_else(|| schema(path, "expected an integer or a \"p/q\" string")),
        Value::String(s) => parse_rational(s).map_err(|e| schema(path, e.to_string())),
        _ => schema_err(path, "expected an integer or a \"p/q\" string"),
    }
}

pub fn poly_to_json(m: &Cdga, p: &GradedPoly) -> Value {
    Value::Array(m.poly_terms(p).into_iter().map(|(c, names)| json!([rational_json(&c), names])).collect())
}

pub fn parse_poly(v: &Value, m: &Cdga, path: &str) -> InputResult<GradedPoly> {
    let mut terms = vec![];
    for (i, t) in array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{i}]");
        let pair = array(t, &tp)?;
        if pair.len() != 2 {
            return schema_err(&tp, "expected [coefficient, [generator names]]");
        }
        let c = parse_rational_json(&pair[0], &format!("{tp}[0]"))?;
        let names = array(&pair[1], &format!("{tp}[1]"))?
            .iter()
            .enumerate()
            .map(|(j, n)| {
                n.as_str().map(str::to_string).ok_or_else(|| schema(&format!("{tp}[1][{j}]"), "expected a name"))
            })
            .collect::<InputResult<Vec<_>>>()?;
        terms.push((c, names));
    }
    m.poly(&terms).map_err(|e| schema(path, e.to_string()))
}

pub fn cdga_to_json(m: &Cdga) -> Value {
    let gens: Vec<Value> = m.generators().iter().map(|g| json!({ "name": g.name, "degree": g.degree })).collect();
    let d: Map<String, Value> =
        m.generators().iter().enumerate().map(|(i, g)| (g.name.clone(), poly_to_json(m, m.d_of(i)))).collect();
    json!({ "generators": gens, "d": d })
}

pub fn parse_cdga(v: &Value, path: &str) -> InputResult<Cdga> {
    let gp = format!("{path}.generators");
    let mut generators = vec![];
    for (i, g) in array(field(v, "generators", path)?, &gp)?.iter().enumerate() {
        let ip = format!("{gp}[{i}]");
        let name = field(g, "name", &ip)?.as_str().ok_or_else(|| schema(&ip, "name must be a string"))?;
        let degree = uint(field(g, "degree", &ip)?, &format!("{ip}.degree"))?;
        generators.push(Generator { name: name.to_string(), degree: degree as u32 });
    }
    let bare = Cdga::new(generators.clone(), vec![GradedPoly::zero(); generators.len()])
        .map_err(|e| schema(&gp, e.to_string()))?;
    let dp = format!("{path}.d");
    let dv = field(v, "d", path)?.as_object().ok_or_else(|| schema(&dp, "expected an object"))?;
    if let Some(unknown) = dv.keys().find(|k| bare.index_of(k).is_err()) {
        return Err(schema(&dp, format!("unknown generator {unknown}")));
    }
    let d = generators
        .iter()
        .map(|g| match dv.get(&g.name) {
            Some(p) => parse_poly(p, &bare, &format!("{dp}.{}", g.name)),
            None => Ok(GradedPoly::zero()),
        })
        .collect::<InputResult<Vec<_>>>()?;
    Cdga::new(generators, d).map_err(|e| InputError::Invariant(e.to_string()))
}

pub fn derivation_to_json(m: &Cdga, i: &Derivation) -> Value {
    let images: Map<String, Value> =
        m.generators().iter().zip(&i.images).map(|(g, p)| (g.name.clone(), poly_to_json(m, p))).collect();
    json!({ "degree": i.degree, "images": images })
}

pub fn parse_derivation(v: &Value, m: &Cdga, path: &str) -> InputResult<Derivation> {
    let degree = int(field(v, "degree", path)?, &format!("{path}.degree"))? as i32;
    let ip = format!("{path}.images");
    let iv = field(v, "images", path)?.as_object().ok_or_else(|| schema(&ip, "expected an object"))?;
    if let Some(unknown) = iv.keys().find(|k| m.index_of(k).is_err()) {
        return Err(schema(&ip, format!("unknown generator {unknown}")));
    }
    let images = m
        .generators()
        .iter()
        .map(|g| iv.get(&g.name).map_or(Ok(GradedPoly::zero()), |p| parse_poly(p, m, &format!("{ip}.{}", g.name))))
        .collect::<InputResult<Vec<_>>>()?;
    Derivation::new(m, degree, images).map_err(|e| InputError::Invariant(format!("{path}: {e}")))
}

fn tpoly_to_json(m: &Cdga, p: &TPoly) -> Value {
    Value::Array(p.coeffs().iter().map(|(k, q)| json!([k, poly_to_json(m, q)])).collect())
}

fn parse_tpoly(v: &Value, m: &Cdga, path: &str) -> InputResult<TPoly> {
    let mut coeffs = vec![];
    for (i, t) in array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{i}]");
        let pair = array(t, &tp)?;
        if pair.len() != 2 {
            return schema_err(&tp, "expected [t power, polynomial]");
        }
        coeffs.push((uint(&pair[0], &format!("{tp}[0]"))? as u32, parse_poly(&pair[1], m, &format!("{tp}[1]"))?));
    }
    Ok(TPoly::from_coeffs(coeffs))
}

/// `{name: {"F": [[k, poly]...], "G": [[k, poly]...]}}` with `x -> F + dt G`.
pub fn homotopy_to_json(m: &Cdga, h: &HomotopyLine) -> Value {
    let o: Map<String, Value> = m
        .generators()
        .iter()
        .zip(&h.on_generators)
        .map(|(g, e)| (g.name.clone(), json!({ "F": tpoly_to_json(m, &e.a), "G": tpoly_to_json(m, &e.b) })))
        .collect();
    Value::Object(o)
}

pub fn parse_homotopy(v: &Value, m: &Cdga, path: &str) -> InputResult<HomotopyLine> {
    let o = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    if let Some(unknown) = o.keys().find(|k| m.index_of(k).is_err()) {
        return Err(schema(path, format!("unknown generator {unknown}")));
    }
    let mut on_generators = vec![];
    for (i, g) in m.generators().iter().enumerate() {
        let gp = format!("{path}.{}", g.name);
        let e = match o.get(&g.name) {
            Some(e) => TdtElement {
                a: parse_tpoly(field(e, "F", &gp)?, m, &format!("{gp}.F"))?,
                b: opt_field(e, "G").map_or(Ok(TPoly::default()), |b| parse_tpoly(b, m, &format!("{gp}.G")))?,
            },
            None => TdtElement { a: TPoly::constant(m.generator(i)), b: TPoly::default() },
        };
        on_generators.push(e);
    }
    let h = HomotopyLine { on_generators };
    h.validate(m).map_err(|e| InputError::Invariant(format!("{path}: {e}")))?;
    Ok(h)
}

/// Input of `cdga`: a model, optionally derivations `i`, `j` and a homotopy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdgaInput {
    pub cdga: Cdga,
    pub i: Option<Derivation>,
    pub j: Option<Derivation>,
    pub homotopy: Option<HomotopyLine>,
}

impl CdgaInput {
    pub fn to_json(&self) -> Value {
        let mut o = Map::new();
        o.insert("schema".into(), json!(SCHEMA_VERSION));
        o.insert("cdga".into(), cdga_to_json(&self.cdga));
        if let Some(i) = &self.i {
            o.insert("i".into(), derivation_to_json(&self.cdga, i));
        }
        if let Some(j) = &self.j {
            o.insert("j".into(), derivation_to_json(&self.cdga, j));
        }
        if let Some(h) = &self.homotopy {
            o.insert("homotopy".into(), homotopy_to_json(&self.cdga, h));
        }
        Value::Object(o)
    }

    pub fn parse(v: &Value) -> InputResult<Self> {
        check_schema(v)?;
        let cdga = parse_cdga(field(v, "cdga", "$")?, "$.cdga")?;
        let i = opt_field(v, "i").map(|x| parse_derivation(x, &cdga, "$.i")).transpose()?;
        let j = opt_field(v, "j").map(|x| parse_derivation(x, &cdga, "$.j")).transpose()?;
        let homotopy = opt_field(v, "homotopy").map(|x| parse_homotopy(x, &cdga, "$.homotopy")).transpose()?;
        Ok(CdgaInput { cdga, i, j, homotopy })
    }
}

/// Group-element exponent vectors, free part first.
pub fn group_element_to_json(g: &GroupElement) -> Value {
    Value::Array(g.free.iter().map(|&e| json!(e)).chain(g.torsion.iter().map(|&e| json!(e))).collect())
}

/// Canonical map helper for report data.
pub fn object(entries: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(
        entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>().into_iter().collect(),
    )
}
