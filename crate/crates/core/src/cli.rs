//! Command implementations behind the `troptheta` binary. Each command takes
//! the raw input text and returns an exit code with the text to emit.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cobordism::{fourier_object, replay_certificate, run_pipeline, BraneKind, BraneSymbol, FiltrationOutcome, PipelineConfig, Side, TorusPoint};
use crate::complex::{check_balancing, check_regular, corner_locus, corner_locus_of_terms, to_svg, TropicalComplex};
use crate::error::Error;
use crate::exact::rational::{self as rat, format_rational, Rational};
use crate::intersect::PerturbationCertificate;
use crate::theta::ThetaSpec;
use crate::torus::{dual_polarization, Polarization, TorusConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    /// Extra file to write (SVG), if requested.
    pub svg: Option<String>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, ..Default::default() }
    }

    fn err(code: i32, msg: impl Into<String>) -> Self {
        Outcome { code, stderr: msg.into(), ..Default::default() }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Outcome> {
    serde_json::from_str(text).map_err(|e| Outcome::err(EXIT_INPUT, format!("parse error: {e}")))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Exit code for library errors: validation failures are 1, malformed input is 2.
fn code_for(e: &Error) -> i32 {
    match e {
        Error::RankDeficient | Error::NotSymmetric | Error::NotIntegral(_) | Error::NotPositiveDefinite { .. } => EXIT_FAIL,
        Error::Exhausted { .. } => EXIT_EXHAUSTED,
        _ => EXIT_INPUT,
    }
}

fn fail(e: Error) -> Outcome {
    Outcome::err(code_for(&e), format!("error: {e}"))
}

fn matrix_lines(name: &str, m: &[Vec<Rational>]) -> String {
    let rows: Vec<String> = m.iter().map(|r| format!("[{}]", r.iter().map(format_rational).collect::<Vec<_>>().join(", "))).collect();
    format!("{name}: [{}]\n", rows.join(", "))
}

pub fn cmd_torus_validate(text: &str) -> Outcome {
    let cfg: TorusConfig = match parse(text) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let (p, _) = match cfg.build() {
        Ok(x) => x,
        Err(e) => {
            let mut o = fail(e);
            o.stdout = "positive definite: no\nvalid: no\n".into();
            return o;
        }
    };
    let mut out = String::new();
    out += &format!("n: {}\n", p.dim());
    out += &matrix_lines("lambda1", &p.torus.lambda1.basis().to_rows());
    out += &matrix_lines("lambda2", &p.torus.lambda2.basis().to_rows());
    out += &matrix_lines("gram", &p.gram().to_rows());
    let divisors: Vec<String> = p.elementary_divisors().iter().map(BigInt::to_string).collect();
    out += &format!("elementary divisors: [{}]\n", divisors.join(", "));
    out += &format!("principal: {}\n", if p.is_principal() { "yes" } else { "no" });
    out += "positive definite: yes\nvalid: yes\n";
    Outcome::ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartTerm {
    pub z: Vec<i64>,
    #[serde(with = "rat::serde_q")]
    pub c: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub n: usize,
    pub terms: Vec<ChartTerm>,
}

/// Either a theta function on a torus or a tropical polynomial on `ℝⁿ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HypersurfaceConfig {
    Theta { torus: TorusConfig, theta: ThetaSpec },
    Chart { chart: ChartSpec },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HypersurfaceFlags {
    pub svg: bool,
    pub check_balancing: bool,
    pub check_regular: bool,
}

#[derive(Serialize)]
struct HypersurfaceReport {
    complex: crate::complex::ComplexJson,
    digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    balanced: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regular: Option<bool>,
}

fn build_hypersurface(cfg: &HypersurfaceConfig) -> crate::Result<TropicalComplex> {
    match cfg {
        HypersurfaceConfig::Theta { torus, theta } => {
            let (p, _) = torus.build()?;
            corner_locus(&theta.build(&p)?)
        }
        HypersurfaceConfig::Chart { chart } => {
            let terms: Vec<(Vec<BigInt>, Rational)> = chart
                .terms
                .iter()
                .map(|t| (t.z.iter().map(|&x| BigInt::from(x)).collect(), t.c.clone()))
                .collect();
            if terms.iter().any(|(z, _)| z.len() != chart.n) {
                return Err(Error::DimensionMismatch { expected: chart.n, got: terms.iter().map(|t| t.0.len()).find(|&l| l != chart.n).unwrap_or(0) });
            }
            corner_locus_of_terms(&terms, chart.n)
        }
    }
}

pub fn cmd_hypersurface(text: &str, flags: HypersurfaceFlags) -> Outcome {
    let value: serde_json::Value = match parse(text) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let cfg: HypersurfaceConfig = match serde_json::from_value(value) {
        Ok(c) => c,
        Err(e) => return Outcome::err(EXIT_INPUT, format!("parse error: expected {{torus, theta}} or {{chart}}: {e}")),
    };
    let c = match build_hypersurface(&cfg) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let balanced = if flags.check_balancing {
        match check_balancing(&c) {
            Ok(b) => Some(b),
            Err(e) => return fail(e),
        }
    } else {
        None
    };
    let regular = flags.check_regular.then(|| check_regular(&c));
    let report = HypersurfaceReport { complex: c.to_json(), digest: c.digest(), balanced, regular };
    let mut out = Outcome::ok(pretty(&report));
    if flags.svg {
        if c.ambient.is_torus() && c.dim() == 2 {
            match to_svg(&c) {
                Ok(s) => out.svg = Some(s),
                Err(e) => return fail(e),
            }
        } else {
            out.stderr = "notice: SVG output is only drawn for 2-tori; emitted JSON only\n".into();
        }
    }
    if balanced == Some(false) || regular == Some(false) {
        out.code = EXIT_FAIL;
        out.stderr += &format!("check failed: balanced={balanced:?} regular={regular:?}\n");
    }
    out
}

#[derive(Serialize)]
struct DegenerateReport {
    success: bool,
    degenerate_pair: usize,
}

pub fn cmd_filtration_verify(text: &str) -> Outcome {
    let cfg: PipelineConfig = match parse(text) {
        Ok(c) => c,
        Err(o) => return o,
    };
    match run_pipeline(&cfg) {
        Ok(FiltrationOutcome::Certified(cert)) => {
            let empty = cert.emptiness.values().filter(|&&e| e).count();
            let summary = format!("k = {}: {}/{} sign vectors empty, dimension audit {}\n", cert.k, empty, cert.emptiness.len(), cert.dimension_audit);
            Outcome {
                code: if cert.success { EXIT_OK } else { EXIT_FAIL },
                stdout: pretty(&cert),
                stderr: summary,
                svg: None,
            }
        }
        Ok(FiltrationOutcome::Degenerate { index }) => {
            let mut o = Outcome::ok(pretty(&DegenerateReport { success: true, degenerate_pair: index }));
            o.stderr = format!("pair {index} has b+ = b-: the generator is zero\n");
            o
        }
        Err(Error::Exhausted { max_trials, hypersurface, partial }) => Outcome {
            code: EXIT_EXHAUSTED,
            stdout: pretty(&*partial),
            stderr: format!("exhausted {max_trials} trials on hypersurface {hypersurface} at k = {} (cap {})\n", partial.k, cfg.k_cap),
            svg: None,
        },
        Err(e) => fail(e),
    }
}

pub fn cmd_replay(text: &str) -> Outcome {
    let cert: PerturbationCertificate = match parse(text) {
        Ok(c) => c,
        Err(o) => return o,
    };
    match replay_certificate(&cert) {
        Ok(r) if r.ok => Outcome::ok("replay: ok\n".into()),
        Ok(r) => Outcome::err(EXIT_FAIL, format!("replay: mismatch at {}\n", r.mismatch.unwrap_or_default())),
        Err(e) => fail(e),
    }
}

/// Short identifier of a torus configuration.
pub fn torus_id(cfg: &TorusConfig) -> String {
    let text = serde_json::to_string(cfg).expect("serializable");
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolJson {
    pub kind: BraneKind,
    pub side: Side,
    /// Identifier of the torus the symbol lives on; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus_id: Option<String>,
    #[serde(with = "rat::serde_q::vec")]
    pub level: Vec<Rational>,
    #[serde(with = "rat::serde_q")]
    pub grading: Rational,
    #[serde(default)]
    pub shift: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierInput {
    /// The base torus `B`.
    pub torus: TorusConfig,
    pub symbol: SymbolJson,
}

#[derive(Serialize)]
struct FourierReport {
    symbol: SymbolJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    twice_is_negation_with_shift: Option<bool>,
}

fn side_config(base: &Polarization, side: Side) -> crate::Result<TorusConfig> {
    Ok(match side {
        Side::Base => TorusConfig::from_polarization(base),
        Side::Dual => TorusConfig::from_polarization(&dual_polarization(base)?),
    })
}

fn to_json(s: &BraneSymbol, base: &Polarization) -> crate::Result<SymbolJson> {
    Ok(SymbolJson {
        kind: s.kind,
        side: s.side,
        torus_id: Some(torus_id(&side_config(base, s.side)?)),
        level: s.level.coords().to_vec(),
        grading: s.grading.clone(),
        shift: s.shift,
    })
}

pub fn cmd_fourier(text: &str, twice: bool) -> Outcome {
    let input: FourierInput = match parse(text) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let base = match input.torus.build() {
        Ok((p, _)) => p,
        Err(e) => return Outcome::err(EXIT_INPUT, format!("error: {e}")),
    };
    let n = base.dim();
    let s = &input.symbol;
    if let Some(id) = &s.torus_id {
        match side_config(&base, s.side) {
            Ok(cfg) if &torus_id(&cfg) == id => {}
            Ok(_) => return Outcome::err(EXIT_INPUT, format!("error: torus tag {id} does not match the {:?} torus", s.side)),
            Err(e) => return fail(e),
        }
    }
    if s.level.len() != n {
        return Outcome::err(EXIT_INPUT, format!("error: level has {} coordinates, torus has dimension {n}", s.level.len()));
    }
    let symbol = BraneSymbol { kind: s.kind, side: s.side, level: TorusPoint::new(s.level.clone()), grading: s.grading.clone(), shift: s.shift };
    let run = || -> crate::Result<(BraneSymbol, Option<bool>)> {
        let once = fourier_object(&symbol, n)?;
        if !twice {
            return Ok((once, None));
        }
        let again = fourier_object(&once, n)?;
        let expected = BraneSymbol { level: symbol.level.neg(), shift: symbol.shift + n as i64, ..symbol.clone() };
        Ok((again.clone(), Some(again == expected)))
    };
    match run() {
        Ok((out, verdict)) => match to_json(&out, &base) {
            Ok(symbol) => {
                let code = if verdict == Some(false) { EXIT_FAIL } else { EXIT_OK };
                Outcome { code, stdout: pretty(&FourierReport { symbol, twice_is_negation_with_shift: verdict }), ..Default::default() }
            }
            Err(e) => fail(e),
        },
        Err(e) => Outcome::err(EXIT_INPUT, format!("error: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA111: &str = r#"{"n":2,"lambda1":[["2","1"],["1","2"]],"lambda2":[["1","0"],["0","1"]],"polarization":[["1","0"],["0","1"]]}"#;

    #[test]
    fn validate_codes() {
        let o = cmd_torus_validate(ALPHA111);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("gram: [[2, 1], [1, 2]]"));
        let bad = r#"{"n":1,"lambda1":[["1"]],"lambda2":[["1"]],"polarization":[["-1"]]}"#;
        let o = cmd_torus_validate(bad);
        assert_eq!(o.code, 1);
        assert!(o.stderr.contains("leading minor 1 = -1"));
        assert_eq!(cmd_torus_validate("{not json").code, 2);
    }

    #[test]
    fn fourier_tag_check() {
        let fiber = format!(r#"{{"torus":{ALPHA111},"symbol":{{"kind":"fiber","side":"base","level":["1/3","0"],"grading":"1"}}}}"#);
        let o = cmd_fourier(&fiber, false);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.contains("flat_section"));
        let o = cmd_fourier(&fiber, true);
        assert!(o.stdout.contains("\"twice_is_negation_with_shift\": true"));
        let tagged = format!(r#"{{"torus":{ALPHA111},"symbol":{{"kind":"flat_section","side":"dual","torus_id":"00","level":["0","0"],"grading":"0"}}}}"#);
        assert_eq!(cmd_fourier(&tagged, false).code, 2);
    }
}
