//! Scenario description and its flat `key = value` configuration format.
//!
//! Each non-empty line holds `dotted.key = <JSON literal>`; `#` starts a
//! comment outside string literals. Example:
//!
//! ```text
//! name = "riemann"
//! system.family = "ps3"        # ps3 | ps4 | two_d | nonlinear_2x2
//! system.p = [0, 0, 1]         # ascending coefficients of P
//! scheme.epsilon = 0.004
//! velocity.kind = "riemann"
//! velocity.left = 2.0
//! initial.density.terms = [["const", 1.0], ["sin", 0.5, 1]]
//! ```

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::cascade::{Family, Polynomial, SchemeParams, Smoothing, SystemSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mollifier::BumpShape;
use crate::profile::{Analytic, InitialData, Term};
use crate::scalar::Real;
use crate::transport::FluxFn;
use crate::velocity::{RiemannVelocity, VelocityKind, VelocitySpec};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialConditions {
    pub density: InitialData,
    pub w: InitialData,
    pub z: InitialData,
}

/// A complete, validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: SystemSpec,
    pub params: SchemeParams,
    pub velocity: VelocitySpec,
    /// y-component of the velocity (2-D runs only).
    pub velocity_y: VelocitySpec,
    pub initial: InitialConditions,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub output: Option<String>,
}

impl Scenario {
    /// Grid with `N = round(2π/ε)` cells per axis.
    pub fn grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::for_epsilon(self.system.family.dimension(), self.params.epsilon)
    }

    /// Copy with `ε` replaced by the spacing of its own grid, so `h = ε` holds exactly.
    pub fn effective(&self) -> Result<Scenario> {
        let grid: Grid<f64> = self.grid()?;
        let mut s = self.clone();
        s.params.epsilon = grid.spacing();
        Ok(s)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Scenario {
        let mut s = self.clone();
        s.params.epsilon = epsilon;
        s
    }

    /// Sorted snapshot times, always containing `t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = if self.snapshots.is_empty() {
            vec![0.0, self.t_end]
        } else {
            self.snapshots.clone()
        };
        t.push(self.t_end);
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    pub fn validate(&self) -> Result<()> {
        let sys = &self.system;
        let dim = sys.family.dimension();
        for (field, v) in [
            ("system.a", sys.a),
            ("system.b", sys.b),
            ("system.c", sys.c),
            ("system.z_transport", sys.z_transport),
            ("system.z_source", sys.z_source),
        ] {
            if !v.is_finite() {
                return Err(Error::validation(field, "coefficient must be finite"));
            }
        }
        if sys
            .p
            .coeffs()
            .iter()
            .chain(sys.q.coeffs())
            .any(|c| !c.is_finite())
        {
            return Err(Error::validation(
                "system.p",
                "polynomial coefficients must be finite",
            ));
        }
        if dim == 1 && !sys.q.is_zero() {
            return Err(Error::validation(
                "system.q",
                "Q is only used by the two_d family",
            ));
        }
        self.params.validate(sys.degree(), sys.has_z())?;

        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::validation(
                "run.t_end",
                "t_end must be finite and non-negative",
            ));
        }
        if let Some(t) = self
            .snapshots
            .iter()
            .find(|t| !(t.is_finite() && **t >= 0.0 && **t <= self.t_end))
        {
            return Err(Error::validation(
                "run.snapshots",
                format!("snapshot time {t} lies outside [0, t_end = {}]", self.t_end),
            ));
        }

        let velocities = [
            ("velocity", &self.velocity),
            ("velocity_y", &self.velocity_y),
        ];
        for (key, v) in velocities {
            let profile = match &v.kind {
                VelocityKind::Numeric(p) | VelocityKind::Prescribed(p) => Some(p),
                _ => None,
            };
            if let Some(p) = profile {
                for t in &p.terms {
                    t.validate()?;
                }
                if dim == 1 && p.depends_on_y() {
                    return Err(Error::validation(
                        key,
                        "y-dependent terms need the two_d family",
                    ));
                }
            }
            if let VelocityKind::ExactRiemann { left, right } = v.kind {
                if !(left.is_finite() && right.is_finite()) {
                    return Err(Error::validation(key, "Riemann states must be finite"));
                }
                let rv = RiemannVelocity::new(left, right, sys.a, self.params.velocity_width());
                if sys.family != Family::Nonlinear && self.t_end > rv.horizon() {
                    return Err(Error::validation(
                        "run.t_end",
                        format!(
                            "{key}: the periodic Riemann waves interact after t = {:.4} (t_end = {})",
                            rv.horizon(),
                            self.t_end
                        ),
                    ));
                }
            }
            if dim == 2 && v.is_numeric() {
                return Err(Error::validation(
                    key,
                    "the numeric velocity solver is 1-D only",
                ));
            }
        }
        if dim == 1 && self.velocity_y.kind != VelocityKind::Zero {
            return Err(Error::validation(
                "velocity_y",
                "only the two_d family has a y-velocity",
            ));
        }
        if sys.family == Family::Nonlinear && self.velocity.kind == VelocityKind::Zero {
            return Err(Error::validation(
                "velocity.kind",
                "the nonlinear family takes its initial u from the velocity profile",
            ));
        }

        let init = [
            ("initial.density", &self.initial.density),
            ("initial.w", &self.initial.w),
            ("initial.z", &self.initial.z),
        ];
        for (key, data) in init {
            match data {
                InitialData::Analytic(a) => {
                    for t in &a.terms {
                        t.validate()?;
                    }
                    if dim == 1 && a.depends_on_y() {
                        return Err(Error::validation(
                            key,
                            "y-dependent terms need the two_d family",
                        ));
                    }
                }
                InitialData::Riemann { left, right }
                    if !(left.is_finite() && right.is_finite()) =>
                {
                    return Err(Error::validation(key, "Riemann states must be finite"));
                }
                _ => {}
            }
        }
        if !sys.has_w() && !self.initial.w.is_zero() {
            return Err(Error::validation(
                "initial.w",
                "the nonlinear family has no w field",
            ));
        }
        if !sys.has_z() && !self.initial.z.is_zero() {
            return Err(Error::validation(
                "initial.z",
                "only the ps4 family has a Z field",
            ));
        }
        Ok(())
    }
}

struct Entry {
    value: Value,
    line: usize,
    column: usize,
}

/// Position of a `#` comment outside of string literals.
fn comment_start(line: &str) -> Option<usize> {
    let mut in_string = false;
    let mut escaped = false;
    for (i, ch) in line.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
        } else if ch == '"' {
            in_string = true;
        } else if ch == '#' {
            return Some(i);
        }
    }
    None
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match comment_start(raw) {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let eq = line.find('=').ok_or_else(|| Error::Parse {
            line: line_no,
            column: line.len() - line.trim_start().len() + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = line[..eq].trim();
        let key_col = line.len() - line.trim_start().len() + 1;
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
        {
            return Err(Error::Parse {
                line: line_no,
                column: key_col,
                message: format!("invalid key `{key}`"),
            });
        }
        let rest = &line[eq + 1..];
        let value_col = eq + 2 + (rest.len() - rest.trim_start().len());
        let value: Value = serde_json::from_str(rest.trim()).map_err(|e| Error::Parse {
            line: line_no,
            column: value_col + e.column().saturating_sub(1),
            message: format!("invalid value: {e}"),
        })?;
        if map.contains_key(key) {
            return Err(Error::Parse {
                line: line_no,
                column: key_col,
                message: format!("duplicate key `{key}`"),
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                value,
                line: line_no,
                column: key_col,
            },
        );
    }
    if map.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty document".into(),
        });
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, Entry>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key).map(|e| e.value)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(_) => Err(Error::validation(key, "expected a number")),
        }
    }

    fn number_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| Error::validation(key, "missing required number"))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Error::validation(key, "expected a string")),
        }
    }

    fn numbers(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::validation(key, "expected an array of numbers"))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(Error::validation(key, "expected an array of numbers")),
        }
    }

    fn terms(&mut self, key: &str) -> Result<Analytic> {
        let bad = || {
            Error::validation(
                key,
                "expected [[\"const\", a], [\"sin\"|\"cos\"|\"sin_y\"|\"cos_y\", amplitude, k], ...]",
            )
        };
        let Some(value) = self.take(key) else {
            return Err(Error::validation(key, "missing terms"));
        };
        let items = value.as_array().ok_or_else(bad)?;
        let mut terms = Vec::with_capacity(items.len());
        for item in items {
            let parts = item.as_array().ok_or_else(bad)?;
            let name = parts.first().and_then(Value::as_str).ok_or_else(bad)?;
            let nums = parts[1..]
                .iter()
                .map(|v| v.as_f64().ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            let term = match (name, nums.as_slice()) {
                ("const", [a]) => Term::Const(*a),
                ("sin", [amp, k]) => Term::Sin { amp: *amp, k: *k },
                ("cos", [amp, k]) => Term::Cos { amp: *amp, k: *k },
                ("sin_y", [amp, k]) => Term::SinY { amp: *amp, k: *k },
                ("cos_y", [amp, k]) => Term::CosY { amp: *amp, k: *k },
                _ => return Err(bad()),
            };
            terms.push(term);
        }
        Ok(Analytic::new(terms))
    }

    fn velocity(&mut self, prefix: &str, a: f64) -> Result<VelocitySpec> {
        let kind_key = format!("{prefix}.kind");
        let kind = self.string(&kind_key)?.unwrap_or_else(|| "zero".into());
        let kind = match kind.as_str() {
            "zero" => VelocityKind::Zero,
            "riemann" => VelocityKind::ExactRiemann {
                left: self.required_number(&format!("{prefix}.left"))?,
                right: self.required_number(&format!("{prefix}.right"))?,
            },
            "numeric" => VelocityKind::Numeric(self.terms(&format!("{prefix}.terms"))?),
            "prescribed" => VelocityKind::Prescribed(self.terms(&format!("{prefix}.terms"))?),
            other => {
                return Err(Error::validation(
                    kind_key,
                    format!("unknown kind `{other}` (zero | riemann | numeric | prescribed)"),
                ))
            }
        };
        Ok(VelocitySpec { kind, a })
    }

    fn initial(&mut self, prefix: &str) -> Result<InitialData> {
        let kind_key = format!("{prefix}.kind");
        let kind = self.string(&kind_key)?.unwrap_or_else(|| "zero".into());
        Ok(match kind.as_str() {
            "zero" => InitialData::Zero,
            "riemann" => InitialData::Riemann {
                left: self.required_number(&format!("{prefix}.left"))?,
                right: self.required_number(&format!("{prefix}.right"))?,
            },
            "analytic" => InitialData::Analytic(self.terms(&format!("{prefix}.terms"))?),
            other => {
                return Err(Error::validation(
                    kind_key,
                    format!("unknown kind `{other}` (zero | riemann | analytic)"),
                ))
            }
        })
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut r = Reader {
        map: parse_entries(text)?,
    };
    let name = r.string("name")?.unwrap_or_else(|| "scenario".into());

    let family_name = r
        .string("system.family")?
        .ok_or_else(|| Error::validation("system.family", "missing required string"))?;
    let family = Family::parse(&family_name).ok_or_else(|| {
        Error::validation(
            "system.family",
            format!("unknown family `{family_name}` (ps3 | ps4 | two_d | nonlinear_2x2)"),
        )
    })?;
    let base = match family {
        Family::Ps3 => SystemSpec::ps3(1.0, 1.0, 1.0, Polynomial::monomial(2, 1.0)),
        Family::Ps4 => SystemSpec::ps4(),
        Family::TwoD => SystemSpec::two_d(Polynomial::monomial(2, 1.0), Polynomial::default()),
        Family::Nonlinear => SystemSpec::nonlinear(FluxFn::Const(0.0), FluxFn::Const(0.0)),
    };
    let flux = |r: &mut Reader, key: &str, default: FluxFn| -> Result<FluxFn> {
        match r.string(key)? {
            Some(s) => FluxFn::parse(&s),
            None => Ok(default),
        }
    };
    let system = SystemSpec {
        family,
        a: r.number_or("system.a", base.a)?,
        b: r.number_or("system.b", base.b)?,
        c: r.number_or("system.c", base.c)?,
        p: r.numbers("system.p")?
            .map(Polynomial::new)
            .unwrap_or(base.p),
        q: r.numbers("system.q")?
            .map(Polynomial::new)
            .unwrap_or(base.q),
        z_transport: r.number_or("system.z_transport", base.z_transport)?,
        z_source: r.number_or("system.z_source", base.z_source)?,
        f: flux(&mut r, "system.f", base.f)?,
        g: flux(&mut r, "system.g", base.g)?,
    };

    let smoothing = match r.string("scheme.smoothing")?.as_deref() {
        None | Some("power") => {
            if r.take("scheme.smoothing_cells").is_some() {
                return Err(Error::validation(
                    "scheme.smoothing_cells",
                    "only meaningful with scheme.smoothing = \"cells\"",
                ));
            }
            Smoothing::Power
        }
        Some("cells") => Smoothing::Cells(r.number_or("scheme.smoothing_cells", 3.0)?),
        Some(other) => {
            return Err(Error::validation(
                "scheme.smoothing",
                format!("unknown smoothing `{other}` (power | cells)"),
            ))
        }
    };
    let bump = match r.string("scheme.bump")? {
        None => BumpShape::Standard,
        Some(s) => BumpShape::parse(&s).ok_or_else(|| {
            Error::validation(
                "scheme.bump",
                format!("unknown bump `{s}` (standard | quartic)"),
            )
        })?,
    };
    let params = SchemeParams {
        epsilon: r.required_number("scheme.epsilon")?,
        alpha: r.required_number("scheme.alpha")?,
        beta: r.required_number("scheme.beta")?,
        gamma: r.number("scheme.gamma")?,
        cfl: r.number_or("scheme.cfl", 0.5)?,
        smoothing,
        bump,
    };
    let velocity = r.velocity("velocity", system.a)?;
    let velocity_y = r.velocity("velocity_y", system.a)?;
    let initial = InitialConditions {
        density: r.initial("initial.density")?,
        w: r.initial("initial.w")?,
        z: r.initial("initial.z")?,
    };
    let t_end = r.required_number("run.t_end")?;
    let snapshots = r.numbers("run.snapshots")?.unwrap_or_default();
    let output = r.string("run.output")?;

    if let Some((key, entry)) = r.map.iter().next() {
        return Err(Error::Parse {
            line: entry.line,
            column: entry.column,
            message: format!("unknown key `{key}`"),
        });
    }
    let scenario = Scenario {
        name,
        system,
        params,
        velocity,
        velocity_y,
        initial,
        t_end,
        snapshots,
        output,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn terms_value(a: &Analytic) -> Value {
    Value::Array(
        a.terms
            .iter()
            .map(|t| match *t {
                Term::Const(c) => json!([t.name(), c]),
                Term::Sin { amp, k }
                | Term::Cos { amp, k }
                | Term::SinY { amp, k }
                | Term::CosY { amp, k } => {
                    json!([t.name(), amp, k])
                }
            })
            .collect(),
    )
}

/// Canonical serialisation; `parse_scenario(&print_scenario(s)) == s`.
pub fn print_scenario(s: &Scenario) -> String {
    let mut lines: Vec<(String, Value)> = Vec::new();
    let mut put = |k: &str, v: Value| lines.push((k.to_string(), v));
    put("name", json!(s.name));
    let sys = &s.system;
    put("system.family", json!(sys.family.name()));
    put("system.a", json!(sys.a));
    put("system.b", json!(sys.b));
    put("system.c", json!(sys.c));
    put("system.p", json!(sys.p.coeffs()));
    put("system.q", json!(sys.q.coeffs()));
    put("system.z_transport", json!(sys.z_transport));
    put("system.z_source", json!(sys.z_source));
    put("system.f", json!(sys.f.to_string()));
    put("system.g", json!(sys.g.to_string()));
    let p = &s.params;
    put("scheme.epsilon", json!(p.epsilon));
    put("scheme.alpha", json!(p.alpha));
    put("scheme.beta", json!(p.beta));
    if let Some(g) = p.gamma {
        put("scheme.gamma", json!(g));
    }
    put("scheme.cfl", json!(p.cfl));
    match p.smoothing {
        Smoothing::Power => put("scheme.smoothing", json!("power")),
        Smoothing::Cells(k) => {
            put("scheme.smoothing", json!("cells"));
            put("scheme.smoothing_cells", json!(k));
        }
    }
    put("scheme.bump", json!(p.bump.name()));
    for (prefix, v) in [("velocity", &s.velocity), ("velocity_y", &s.velocity_y)] {
        match &v.kind {
            VelocityKind::Zero => put(&format!("{prefix}.kind"), json!("zero")),
            VelocityKind::ExactRiemann { left, right } => {
                put(&format!("{prefix}.kind"), json!("riemann"));
                put(&format!("{prefix}.left"), json!(left));
                put(&format!("{prefix}.right"), json!(right));
            }
            VelocityKind::Numeric(a) => {
                put(&format!("{prefix}.kind"), json!("numeric"));
                put(&format!("{prefix}.terms"), terms_value(a));
            }
            VelocityKind::Prescribed(a) => {
                put(&format!("{prefix}.kind"), json!("prescribed"));
                put(&format!("{prefix}.terms"), terms_value(a));
            }
        }
    }
    for (prefix, d) in [
        ("initial.density", &s.initial.density),
        ("initial.w", &s.initial.w),
        ("initial.z", &s.initial.z),
    ] {
        match d {
            InitialData::Zero => put(&format!("{prefix}.kind"), json!("zero")),
            InitialData::Riemann { left, right } => {
                put(&format!("{prefix}.kind"), json!("riemann"));
                put(&format!("{prefix}.left"), json!(left));
                put(&format!("{prefix}.right"), json!(right));
            }
            InitialData::Analytic(a) => {
                put(&format!("{prefix}.kind"), json!("analytic"));
                put(&format!("{prefix}.terms"), terms_value(a));
            }
        }
    }
    put("run.t_end", json!(s.t_end));
    put("run.snapshots", json!(s.snapshots));
    if let Some(o) = &s.output {
        put("run.output", json!(o));
    }
    lines
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const RIEMANN: &str = r#"
# comment line
name = "riemann # not a comment"
system.family = "ps3"
system.a = 1.0
system.b = 2.0
system.c = 2.0
system.p = [0, 0, 1]
scheme.epsilon = 0.004   # trailing comment
scheme.alpha = 0.3
scheme.beta = 0.15
scheme.smoothing = "cells"
scheme.smoothing_cells = 3
velocity.kind = "riemann"
velocity.left = 2.0
velocity.right = 1.0
initial.density.kind = "riemann"
initial.density.left = 2.0
initial.density.right = 1.0
run.t_end = 1.0
run.snapshots = [0.0, 1.0]
"#;

    #[test]
    fn parses_riemann_document() {
        let s = parse_scenario(RIEMANN).unwrap();
        assert_eq!(s.name, "riemann # not a comment");
        assert_eq!(s.system.family, Family::Ps3);
        assert_eq!((s.system.a, s.system.b, s.system.c), (1.0, 2.0, 2.0));
        assert_eq!(s.params.smoothing, Smoothing::Cells(3.0));
        assert_eq!(s.params.cfl, 0.5);
        assert_eq!(
            s.velocity.kind,
            VelocityKind::ExactRiemann {
                left: 2.0,
                right: 1.0
            }
        );
        assert_eq!(
            s.initial.density,
            InitialData::Riemann {
                left: 2.0,
                right: 1.0
            }
        );
        assert_eq!(s.initial.w, InitialData::Zero);
        assert_eq!(s.snapshot_times(), vec![0.0, 1.0]);
    }

    #[test]
    fn round_trip_is_exact() {
        let s = parse_scenario(RIEMANN).unwrap();
        let text = print_scenario(&s);
        assert_eq!(parse_scenario(&text).unwrap(), s);
        assert_eq!(print_scenario(&parse_scenario(&text).unwrap()), text);
    }

    #[test]
    fn empty_document_is_a_parse_error() {
        assert!(matches!(
            parse_scenario(""),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_scenario("# only\n\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_scenario("name = \"x\"\nscheme.alpha = 0.3.1\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column >= 16, "{column}");
            }
            other => panic!("{other}"),
        }
        assert!(matches!(
            parse_scenario("justakey\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let dup = format!("{RIEMANN}\nrun.t_end = 2.0\n");
        assert!(parse_scenario(&dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        let unknown = format!("{RIEMANN}\nscheme.delta = 2.0\n");
        assert!(parse_scenario(&unknown)
            .unwrap_err()
            .to_string()
            .contains("unknown key"));
    }

    #[test]
    fn alpha_above_cap_is_rejected() {
        let text = RIEMANN.replace("scheme.alpha = 0.3", "scheme.alpha = 0.5");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        assert!(err.to_string().contains("1/(n+1)"));
    }

    #[test]
    fn horizon_and_snapshot_checks() {
        let late = RIEMANN.replace("run.t_end = 1.0", "run.t_end = 2.0");
        assert!(parse_scenario(&late)
            .unwrap_err()
            .to_string()
            .contains("interact"));
        let outside = RIEMANN.replace("[0.0, 1.0]", "[0.0, 1.5]");
        assert!(parse_scenario(&outside)
            .unwrap_err()
            .to_string()
            .contains("outside"));
    }

    #[test]
    fn analytic_terms_round_trip() {
        let text = r#"
system.family = "ps4"
scheme.epsilon = 0.01
scheme.alpha = 0.05
scheme.beta = 0.025
scheme.gamma = 0.3
velocity.kind = "numeric"
velocity.terms = [["const", 1.5], ["sin", 0.5, 1]]
initial.density.kind = "analytic"
initial.density.terms = [["const", 1.0], ["sin", 0.5, 1]]
initial.w.kind = "analytic"
initial.w.terms = [["cos", -0.5, 2]]
run.t_end = 0.5
"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.system, SystemSpec::ps4());
        assert_eq!(s.snapshot_times(), vec![0.0, 0.5]);
        assert_eq!(parse_scenario(&print_scenario(&s)).unwrap(), s);
        let bad = text.replace("[\"cos\", -0.5, 2]", "[\"tan\", 1, 1]");
        assert!(parse_scenario(&bad).is_err());
        let no_gamma = text.replace("scheme.gamma = 0.3\n", "");
        assert!(parse_scenario(&no_gamma)
            .unwrap_err()
            .to_string()
            .contains("gamma"));
    }
}
