//! Pulse-sequence DSL: parser, validator, and scheduler.
//!
//! Grammar: one step per line, `KIND key=value ...`, `#` starts a comment.
//! A `MODE freq=... basis=z|y` directive sets the motional frequency and the
//! detection basis. Durations accept `ns`, `us`, `ms` and `s` suffixes,
//! frequencies `Hz`, `kHz` and `MHz`, angles `deg` and `rad`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Z,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    /// Red-sideband mapping pulse.
    Rsb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepKind {
    DopplerCool,
    OpticalPump,
    SidebandCool,
    Hide,
    Unhide,
    CatPulse { alpha: f64 },
    SpecTrain { n_pulses: usize, width: f64, period: f64, delay: f64 },
    SpecPulse,
    CatInverse,
    Rotation { angle: f64, axis: Axis },
    Wait,
    Detect,
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::DopplerCool => "DopplerCool",
            StepKind::OpticalPump => "OpticalPump",
            StepKind::SidebandCool => "SidebandCool",
            StepKind::Hide => "Hide",
            StepKind::Unhide => "Unhide",
            StepKind::CatPulse { .. } => "CatPulse",
            StepKind::SpecTrain { .. } => "SpecTrain",
            StepKind::SpecPulse => "SpecPulse",
            StepKind::CatInverse => "CatInverse",
            StepKind::Rotation { .. } => "Rotation",
            StepKind::Wait => "Wait",
            StepKind::Detect => "Detect",
        }
    }

    fn is_spectroscopy(&self) -> bool {
        matches!(self, StepKind::SpecTrain { .. } | StepKind::SpecPulse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub kind: StepKind,
    /// Duration [s].
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceProgram {
    pub steps: Vec<Step>,
    /// Motional mode frequency [Hz].
    pub mode_frequency: f64,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    /// Index of the offending step, if the issue is step-local.
    pub step_index: Option<usize>,
}

impl Diagnostic {
    fn error(message: impl Into<String>, step_index: Option<usize>) -> Self {
        Self { severity: Severity::Error, message: message.into(), step_index }
    }

    fn warning(message: impl Into<String>, step_index: Option<usize>) -> Self {
        Self { severity: Severity::Warning, message: message.into(), step_index }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimelineEntry {
    pub start: f64,
    pub end: f64,
    pub kind: &'static str,
    /// Scatter phase attached to spectroscopy steps [rad].
    pub phi_sc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub entries: Vec<TimelineEntry>,
    pub total_duration: f64,
    /// Sweep delay that produced this timeline [s].
    pub delay: f64,
    /// Scatter phase of this sweep point [rad].
    pub phi_sc: f64,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Parse `1.23`, `834ns`, `1.199MHz`, `90deg` and friends into base units
/// (seconds, hertz, radians, or dimensionless).
fn parse_value(token: &str, line: usize, column: usize) -> Result<f64> {
    let split = token
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e'
            || c == 'E'))
        .map(|(i, _)| i)
        .unwrap_or(token.len());
    // A bare exponent letter belongs to the number only when followed by a
    // digit or sign; `834ns` splits at `n`, `1e-6s` keeps the exponent.
    let (num_str, suffix) = token.split_at(split);
    let value: f64 = num_str
        .parse()
        .map_err(|_| parse_err(line, column, format!("malformed number `{token}`")))?;
    let scale = match suffix {
        "" => 1.0,
        "ns" => 1e-9,
        "us" => 1e-6,
        "ms" => 1e-3,
        "s" => 1.0,
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "rad" => 1.0,
        "deg" => std::f64::consts::PI / 180.0,
        _ => return Err(parse_err(line, column, format!("unknown unit suffix `{suffix}`"))),
    };
    Ok(value * scale)
}

struct LineCtx<'a> {
    line_no: usize,
    keys: Vec<(&'a str, &'a str, usize)>,
}

impl<'a> LineCtx<'a> {
    fn get(&self, key: &str) -> Option<(&'a str, usize)> {
        self.keys.iter().find(|(k, _, _)| *k == key).map(|&(_, v, c)| (v, c))
    }

    fn value(&self, key: &str) -> Result<f64> {
        let (v, col) = self.get(key).ok_or_else(|| {
            parse_err(self.line_no, 1, format!("missing required key `{key}`"))
        })?;
        parse_value(v, self.line_no, col)
    }

    fn value_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some((v, col)) => parse_value(v, self.line_no, col),
            None => Ok(default),
        }
    }
}

/// Parse a sequence file into a program. Errors carry the 1-based line and
/// column of the offending token.
pub fn parse(text: &str) -> Result<SequenceProgram> {
    let mut steps = Vec::new();
    let mut mode_frequency = None;
    let mut basis = Basis::Z;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = Vec::new();
        let mut pos = 0;
        for tok in line.split_whitespace() {
            let col = line[pos..].find(tok).unwrap() + pos + 1;
            pos = col - 1 + tok.len();
            tokens.push((tok, col));
        }
        let (kind_name, kind_col) = tokens[0];
        let mut keys = Vec::new();
        for &(tok, col) in &tokens[1..] {
            let eq = tok.find('=').ok_or_else(|| {
                parse_err(line_no, col, format!("expected key=value, found `{tok}`"))
            })?;
            keys.push((&tok[..eq], &tok[eq + 1..], col + eq + 1));
        }
        let ctx = LineCtx { line_no, keys };

        if kind_name == "MODE" {
            let (freq_str, col) = ctx.get("freq").ok_or_else(|| {
                parse_err(line_no, kind_col, "MODE requires freq=...")
            })?;
            mode_frequency = Some(parse_value(freq_str, line_no, col)?);
            if let Some((b, col)) = ctx.get("basis") {
                basis = match b {
                    "z" => Basis::Z,
                    "y" => Basis::Y,
                    _ => return Err(parse_err(line_no, col, format!("unknown basis `{b}`"))),
                };
            }
            continue;
        }

        let (kind, duration) = match kind_name {
            "DopplerCool" => (StepKind::DopplerCool, ctx.value("t")?),
            "OpticalPump" => (StepKind::OpticalPump, ctx.value("t")?),
            "SidebandCool" => (StepKind::SidebandCool, ctx.value("t")?),
            "Hide" => (StepKind::Hide, ctx.value("t")?),
            "Unhide" => (StepKind::Unhide, ctx.value("t")?),
            "CatPulse" => {
                let alpha = ctx.value("alpha")?;
                (StepKind::CatPulse { alpha }, ctx.value("t")?)
            }
            "SpecTrain" => {
                let n = ctx.value("n")?;
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(parse_err(line_no, kind_col, "n must be a positive integer"));
                }
                let n_pulses = n as usize;
                let width = ctx.value("width")?;
                let period = ctx.value("period")?;
                let delay = ctx.value_or("delay", 0.0)?;
                let duration = ctx.value_or("t", n_pulses as f64 * period)?;
                (StepKind::SpecTrain { n_pulses, width, period, delay }, duration)
            }
            "SpecPulse" => (StepKind::SpecPulse, ctx.value("t")?),
            "CatInverse" => (StepKind::CatInverse, ctx.value("t")?),
            "Rotation" => {
                let angle = ctx.value("angle")?;
                let (axis_str, col) = ctx.get("axis").ok_or_else(|| {
                    parse_err(line_no, kind_col, "missing required key `axis`")
                })?;
                let axis = match axis_str {
                    "x" => Axis::X,
                    "y" => Axis::Y,
                    "z" => Axis::Z,
                    "rsb" => Axis::Rsb,
                    _ => return Err(parse_err(line_no, col, format!("unknown axis `{axis_str}`"))),
                };
                (StepKind::Rotation { angle, axis }, ctx.value("t")?)
            }
            "Wait" => (StepKind::Wait, ctx.value("t")?),
            "Detect" => (StepKind::Detect, ctx.value("t")?),
            other => {
                return Err(parse_err(line_no, kind_col, format!("unknown step kind `{other}`")))
            }
        };
        if !(duration > 0.0) {
            return Err(parse_err(line_no, kind_col, "duration must be positive"));
        }
        steps.push(Step { kind, duration });
    }

    if steps.is_empty() {
        return Err(parse_err(1, 1, "no steps"));
    }
    let mode_frequency = mode_frequency
        .ok_or_else(|| parse_err(1, 1, "missing MODE freq=... directive"))?;
    if !(mode_frequency > 0.0) {
        return Err(parse_err(1, 1, "mode frequency must be positive"));
    }
    Ok(SequenceProgram { steps, mode_frequency, basis })
}

fn format_time(seconds: f64) -> String {
    // Use a suffixed integer form only when it reparses to the same bits,
    // so render/parse round-trips exactly.
    let ns = (seconds * 1e9).round();
    if ns * 1e-9 == seconds && ns.abs() < 1e15 {
        if ns % 1_000_000.0 == 0.0 {
            return format!("{}ms", ns / 1_000_000.0);
        }
        if ns % 1_000.0 == 0.0 {
            return format!("{}us", ns / 1_000.0);
        }
        return format!("{ns}ns");
    }
    format!("{seconds}s")
}

/// Render a program in canonical form; `parse(render(p))` reproduces `p`.
pub fn render(program: &SequenceProgram) -> String {
    let mut out = String::new();
    let basis = match program.basis {
        Basis::Z => "z",
        Basis::Y => "y",
    };
    writeln!(out, "MODE freq={}Hz basis={basis}", program.mode_frequency).unwrap();
    for step in &program.steps {
        match step.kind {
            StepKind::CatPulse { alpha } => {
                writeln!(out, "CatPulse t={} alpha={alpha}", format_time(step.duration)).unwrap()
            }
            StepKind::SpecTrain { n_pulses, width, period, delay } => writeln!(
                out,
                "SpecTrain n={n_pulses} width={} period={} delay={} t={}",
                format_time(width),
                format_time(period),
                format_time(delay),
                format_time(step.duration)
            )
            .unwrap(),
            StepKind::Rotation { angle, axis } => {
                let axis = match axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                    Axis::Z => "z",
                    Axis::Rsb => "rsb",
                };
                writeln!(
                    out,
                    "Rotation t={} angle={angle}rad axis={axis}",
                    format_time(step.duration)
                )
                .unwrap()
            }
            _ => writeln!(out, "{} t={}", step.kind.name(), format_time(step.duration)).unwrap(),
        }
    }
    out
}

/// Structural and timing checks. Returns diagnostics; an empty error set
/// means the program is runnable.
pub fn validate(program: &SequenceProgram) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let steps = &program.steps;

    let spec_indices: Vec<usize> = steps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind.is_spectroscopy())
        .map(|(i, _)| i)
        .collect();
    let hide = steps.iter().position(|s| s.kind == StepKind::Hide);
    let unhide = steps.iter().position(|s| s.kind == StepKind::Unhide);
    if !spec_indices.is_empty() {
        match (hide, unhide) {
            (Some(h), Some(u)) => {
                if h > spec_indices[0] {
                    diags.push(Diagnostic::error(
                        "Hide must precede the first spectroscopy step",
                        Some(h),
                    ));
                }
                if u < *spec_indices.last().unwrap() {
                    diags.push(Diagnostic::error(
                        "Unhide must follow the last spectroscopy step",
                        Some(u),
                    ));
                }
            }
            _ => diags.push(Diagnostic::error(
                "spectroscopy steps require a Hide/Unhide pair",
                spec_indices.first().copied(),
            )),
        }
    }

    let cat = steps.iter().position(|s| matches!(s.kind, StepKind::CatPulse { .. }));
    let cat_inv = steps.iter().position(|s| s.kind == StepKind::CatInverse);
    match (cat, cat_inv) {
        (Some(c), Some(i)) if c > i => {
            diags.push(Diagnostic::error("CatInverse precedes CatPulse", Some(i)));
        }
        (Some(c), None) => {
            diags.push(Diagnostic::error("CatPulse without matching CatInverse", Some(c)));
        }
        (None, Some(i)) => {
            diags.push(Diagnostic::error("CatInverse without matching CatPulse", Some(i)));
        }
        _ => {}
    }

    for (i, step) in steps.iter().enumerate() {
        if let StepKind::SpecTrain { period, .. } = step.kind {
            let nominal = 1.0 / program.mode_frequency;
            let rel = (period - nominal).abs() / nominal;
            if rel > 0.02 {
                diags.push(Diagnostic::warning(
                    format!(
                        "SpecTrain period {:.1} ns deviates {:.1}% from the motional period {:.1} ns",
                        period * 1e9,
                        rel * 100.0,
                        nominal * 1e9
                    ),
                    Some(i),
                ));
            }
        }
    }

    match steps.last() {
        Some(s) if s.kind == StepKind::Detect => {}
        _ => diags.push(Diagnostic::error("sequence must end with Detect", None)),
    }
    let detect_count = steps.iter().filter(|s| s.kind == StepKind::Detect).count();
    if detect_count > 1 {
        diags.push(Diagnostic::error("multiple Detect steps", None));
    }

    if program.basis == Basis::Y {
        let rotation = steps
            .iter()
            .position(|s| matches!(s.kind, StepKind::Rotation { .. }));
        let detect = steps.iter().position(|s| s.kind == StepKind::Detect);
        match (rotation, detect) {
            (Some(r), Some(d)) if r < d => {}
            _ => diags.push(Diagnostic::error(
                "sigma_y basis requires a Rotation step before Detect",
                None,
            )),
        }
    }

    diags
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Lay out absolute step times for each sweep delay. The delay is inserted
/// immediately before the first spectroscopy step and sets its scatter phase
/// `phi_sc = 2 pi nu delay`.
pub fn schedule(program: &SequenceProgram, delay_sweep: &[f64]) -> Result<Vec<Timeline>> {
    if delay_sweep.iter().any(|d| *d < 0.0) {
        return Err(Error::Schedule("sweep delays must be non-negative".into()));
    }
    let sweep: &[f64] = if delay_sweep.is_empty() { &[0.0] } else { delay_sweep };
    let mut timelines = Vec::with_capacity(sweep.len());
    for &delay in sweep {
        let phi_sc = 2.0 * std::f64::consts::PI * program.mode_frequency * delay;
        let mut t = 0.0f64;
        let mut entries = Vec::with_capacity(program.steps.len());
        let mut delay_spent = false;
        for step in &program.steps {
            if step.kind.is_spectroscopy() && !delay_spent {
                t += delay;
                delay_spent = true;
            }
            let start = t;
            let end = t + step.duration;
            if end < start {
                return Err(Error::Schedule("step interval is inverted".into()));
            }
            entries.push(TimelineEntry {
                start,
                end,
                kind: step.kind.name(),
                phi_sc: step.kind.is_spectroscopy().then_some(phi_sc),
            });
            t = end;
        }
        if !delay_spent {
            t += delay;
        }
        for pair in entries.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::Schedule("overlapping steps".into()));
            }
        }
        timelines.push(Timeline { entries, total_duration: t, delay, phi_sc });
    }
    Ok(timelines)
}

/// CSV export of one timeline: `start_s,end_s,kind,phi_sc_rad`.
pub fn timeline_to_csv(timeline: &Timeline) -> String {
    let mut out = String::from("start_s,end_s,kind,phi_sc_rad\n");
    for e in &timeline.entries {
        let phi = e.phi_sc.map(|p| format!("{p:.9}")).unwrap_or_default();
        writeln!(out, "{:.9},{:.9},{},{}", e.start, e.end, e.kind, phi).unwrap();
    }
    out
}
