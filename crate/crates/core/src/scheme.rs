//! Cutting-and-stacking scheme descriptions and their normalization.
//!
//! A scheme is a per-stage list of cut counts and spacer vectors with an
//! eventually-constant tail. The spacer convention is normative for the
//! whole crate: `spacers[i]` spacer levels sit above subcolumn `i` (0-indexed
//! left to right) before the next subcolumn is stacked, and in a block rule
//! the integers between two `B` tokens attach to the preceding subcolumn
//! (trailing integers attach to the last one). This is the single convention
//! that reproduces the classic Chacon heights 1, 4, 13, 40, ...

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRule {
    pub cuts: u32,
    pub spacers: Vec<u64>,
}

impl StageRule {
    pub fn new(cuts: u32, spacers: Vec<u64>) -> Result<Self> {
        let rule = StageRule { cuts, spacers };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cuts < 2 {
            return Err(Error::Validation(format!(
                "cuts must be at least 2, got {}",
                self.cuts
            )));
        }
        if self.spacers.len() != self.cuts as usize {
            return Err(Error::Validation(format!(
                "expected {} spacer entries, got {}",
                self.cuts,
                self.spacers.len()
            )));
        }
        Ok(())
    }

    pub fn spacer_total(&self) -> u64 {
        self.spacers.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSpec {
    /// Explicit rules for stages `1..=prefix.len()`.
    pub prefix: Vec<StageRule>,
    /// Rule repeated for every stage past the prefix.
    pub tail: StageRule,
    pub name: Option<String>,
}

impl SchemeSpec {
    pub fn new(prefix: Vec<StageRule>, tail: StageRule) -> Result<Self> {
        for r in &prefix {
            r.validate()?;
        }
        tail.validate()?;
        Ok(SchemeSpec { prefix, tail, name: None })
    }

    /// Chacon-3: block rule `B B 1 B`.
    pub fn chacon3() -> Self {
        SchemeSpec {
            prefix: Vec::new(),
            tail: StageRule { cuts: 3, spacers: vec![0, 1, 0] },
            name: Some("chacon3".into()),
        }
    }

    /// Constant-cut staircase, the crate's mixing-flavored preset.
    pub fn staircase4() -> Self {
        SchemeSpec {
            prefix: Vec::new(),
            tail: StageRule { cuts: 4, spacers: vec![0, 1, 2, 3] },
            name: Some("staircase4".into()),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "chacon3" => Some(Self::chacon3()),
            "staircase4" => Some(Self::staircase4()),
            _ => None,
        }
    }

    /// Rule applied when building stage `n+1` from stage `n` (`n >= 1`).
    pub fn rule_at(&self, n: u32) -> &StageRule {
        self.prefix.get((n - 1) as usize).unwrap_or(&self.tail)
    }

    /// Base width `w_1` and total spacer mass such that the construction
    /// fills `[0,1)` exactly: `h_1 w_1 + sum_n sigma_n = 1` with
    /// `sigma_n = spacer_total_n * w_{n+1}` and `w_{n+1} = w_n / r_n`.
    /// The eventually-constant tail makes this a finite sum plus a
    /// geometric series, hence exactly rational.
    pub fn normalize(&self) -> (Scalar, Scalar) {
        let mut factor = scalar::one();
        let mut cut_product = scalar::one();
        for rule in &self.prefix {
            cut_product *= scalar::rat(rule.cuts as i64, 1);
            factor += scalar::rat(rule.spacer_total() as i64, 1) / &cut_product;
        }
        let r = self.tail.cuts as i64;
        let s = self.tail.spacer_total() as i64;
        factor += scalar::rat(s, r - 1) / &cut_product;
        let w1 = factor.recip();
        let spacer_mass = scalar::one() - &w1;
        (w1, spacer_mass)
    }

    /// Canonical textual form accepted back by [`parse_scheme`].
    pub fn serialize(&self) -> String {
        if let Some(name) = &self.name {
            if Self::preset(name).as_ref().map(|p| (&p.prefix, &p.tail))
                == Some((&self.prefix, &self.tail))
            {
                return name.clone();
            }
        }
        let mut out = String::new();
        if !self.prefix.is_empty() {
            let rules: Vec<String> = self.prefix.iter().map(format_rule).collect();
            out.push_str(&format!("prefix: {}\n", rules.join(";")));
        }
        out.push_str(&format!("tail: {}\n", format_rule(&self.tail)));
        out
    }
}

fn format_rule(rule: &StageRule) -> String {
    let spacers: Vec<String> = rule.spacers.iter().map(|s| s.to_string()).collect();
    format!("cuts={} spacers=[{}]", rule.cuts, spacers.join(","))
}

/// Compiles a block rule like `B B 1 B` (each `B` a copy of the previous
/// block, each integer that many spacer symbols) into an eventually-constant
/// scheme.
pub fn compile_block_rule(text: &str) -> Result<SchemeSpec> {
    let rule = parse_block_rule_tokens(text, 1)?;
    Ok(SchemeSpec { prefix: Vec::new(), tail: rule, name: None })
}

fn parse_block_rule_tokens(text: &str, line: usize) -> Result<StageRule> {
    let mut spacers: Vec<u64> = Vec::new();
    let mut blocks = 0u32;
    let mut col = 1usize;
    for raw in text.split_inclusive(char::is_whitespace) {
        let tok = raw.trim_end();
        let tok_col = col;
        col += raw.chars().count();
        if tok.is_empty() {
            continue;
        }
        if tok == "B" {
            blocks += 1;
            spacers.push(0);
        } else if let Ok(k) = tok.parse::<u64>() {
            if k == 0 {
                return Err(Error::parse(line, tok_col, "spacer count must be positive"));
            }
            match spacers.last_mut() {
                Some(s) => *s += k,
                None => {
                    return Err(Error::parse(
                        line,
                        tok_col,
                        "spacers before the first B have no subcolumn to attach to",
                    ))
                }
            }
        } else {
            return Err(Error::parse(
                line,
                tok_col,
                format!("expected 'B' or a positive integer, got {tok:?}"),
            ));
        }
    }
    if blocks < 2 {
        return Err(Error::Validation(format!(
            "block rule needs at least 2 'B' tokens, got {blocks}"
        )));
    }
    StageRule::new(blocks, spacers)
}

/// Parses the scheme file format: a preset name, a `block:` line, or
/// `prefix:`/`tail:` lines with `cuts=R spacers=[s0,...]` rules.
pub fn parse_scheme(text: &str) -> Result<SchemeSpec> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::parse(1, 1, "empty scheme description"));
    }
    if !trimmed.contains(':') {
        return SchemeSpec::preset(trimmed).ok_or_else(|| {
            Error::Validation(format!("unknown preset {trimmed:?}"))
        });
    }
    let mut prefix: Option<Vec<StageRule>> = None;
    let mut tail: Option<StageRule> = None;
    let mut block: Option<SchemeSpec> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or_else(|| {
            Error::parse(line_no, 1, "expected 'prefix:', 'tail:' or 'block:'")
        })?;
        match key.trim() {
            "prefix" => {
                let mut rules = Vec::new();
                for part in rest.split(';') {
                    if part.trim().is_empty() {
                        continue;
                    }
                    rules.push(parse_rule(part, line_no)?);
                }
                prefix = Some(rules);
            }
            "tail" => tail = Some(parse_rule(rest, line_no)?),
            "block" => {
                let spec = SchemeSpec {
                    prefix: Vec::new(),
                    tail: parse_block_rule_tokens(rest, line_no)?,
                    name: None,
                };
                spec.tail.validate()?;
                block = Some(spec);
            }
            other => {
                return Err(Error::parse(
                    line_no,
                    1,
                    format!("unknown key {other:?}"),
                ))
            }
        }
    }
    if let Some(spec) = block {
        if prefix.is_some() || tail.is_some() {
            return Err(Error::Validation(
                "'block:' cannot be combined with 'prefix:'/'tail:'".into(),
            ));
        }
        return Ok(spec);
    }
    let tail = tail.ok_or_else(|| Error::Validation("missing 'tail:' rule".into()))?;
    SchemeSpec::new(prefix.unwrap_or_default(), tail)
}

fn parse_rule(text: &str, line: usize) -> Result<StageRule> {
    let mut cuts: Option<u32> = None;
    let mut spacers: Option<Vec<u64>> = None;
    for tok in text.split_whitespace() {
        if let Some(v) = tok.strip_prefix("cuts=") {
            cuts = Some(v.parse().map_err(|_| {
                Error::parse(line, 1, format!("invalid cut count {v:?}"))
            })?);
        } else if let Some(v) = tok.strip_prefix("spacers=") {
            let inner = v
                .strip_prefix('[')
                .and_then(|v| v.strip_suffix(']'))
                .ok_or_else(|| Error::parse(line, 1, "spacers must be [s0,...]"))?;
            let mut list = Vec::new();
            for s in inner.split(',') {
                if s.trim().is_empty() {
                    continue;
                }
                list.push(s.trim().parse().map_err(|_| {
                    Error::parse(line, 1, format!("invalid spacer count {s:?}"))
                })?);
            }
            spacers = Some(list);
        } else {
            return Err(Error::parse(line, 1, format!("unexpected token {tok:?}")));
        }
    }
    let cuts = cuts.ok_or_else(|| Error::parse(line, 1, "rule is missing cuts="))?;
    let spacers = spacers.ok_or_else(|| Error::parse(line, 1, "rule is missing spacers="))?;
    StageRule::new(cuts, spacers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn block_rule_chacon() {
        let spec = compile_block_rule("B B 1 B").unwrap();
        assert_eq!(spec.tail, StageRule { cuts: 3, spacers: vec![0, 1, 0] });
    }

    #[test]
    fn block_rule_pure_cutting() {
        let spec = compile_block_rule("B B").unwrap();
        assert_eq!(spec.tail, StageRule { cuts: 2, spacers: vec![0, 0] });
    }

    #[test]
    fn block_rule_left_attachment() {
        let spec = compile_block_rule("B 1 B 2 B 3 B").unwrap();
        assert_eq!(spec.tail, StageRule { cuts: 4, spacers: vec![1, 2, 3, 0] });
    }

    #[test]
    fn block_rule_errors() {
        assert!(matches!(compile_block_rule("B"), Err(Error::Validation(_))));
        assert!(matches!(compile_block_rule("1 B B"), Err(Error::Parse { .. })));
        assert!(matches!(compile_block_rule("B x B"), Err(Error::Parse { .. })));
    }

    #[test]
    fn chacon_heights_follow_the_recurrence() {
        let spec = compile_block_rule("B B 1 B").unwrap();
        let mut h: u64 = 1;
        let mut heights = vec![h];
        for n in 1..6 {
            let rule = spec.rule_at(n);
            h = h * rule.cuts as u64 + rule.spacer_total();
            heights.push(h);
        }
        assert_eq!(heights, vec![1, 4, 13, 40, 121, 364]);
    }

    #[test]
    fn normalize_presets() {
        let (w1, mass) = SchemeSpec::chacon3().normalize();
        assert_eq!(w1, rat(2, 3));
        assert_eq!(mass, rat(1, 3));

        let (w1, mass) = SchemeSpec::staircase4().normalize();
        assert_eq!(w1, rat(1, 3));
        assert_eq!(mass, rat(2, 3));

        let odometer = SchemeSpec::new(vec![], StageRule::new(2, vec![0, 0]).unwrap()).unwrap();
        let (w1, mass) = odometer.normalize();
        assert_eq!(w1, rat(1, 1));
        assert_eq!(mass, rat(0, 1));
    }

    #[test]
    fn normalize_shrinks_when_spacers_double() {
        let a = SchemeSpec::new(vec![], StageRule::new(3, vec![0, 1, 0]).unwrap()).unwrap();
        let b = SchemeSpec::new(vec![], StageRule::new(3, vec![0, 2, 0]).unwrap()).unwrap();
        assert!(b.normalize().0 < a.normalize().0);
    }

    #[test]
    fn parse_round_trip() {
        let spec = SchemeSpec::new(
            vec![StageRule::new(2, vec![1, 0]).unwrap()],
            StageRule::new(4, vec![0, 1, 2, 3]).unwrap(),
        )
        .unwrap();
        let text = spec.serialize();
        assert_eq!(parse_scheme(&text).unwrap(), spec);

        let preset = parse_scheme("chacon3").unwrap();
        assert_eq!(preset, SchemeSpec::chacon3());
        assert_eq!(parse_scheme(&preset.serialize()).unwrap(), preset);
    }

    #[test]
    fn parse_rejects_invalid_rules() {
        assert!(parse_scheme("tail: cuts=1 spacers=[0]").is_err());
        assert!(parse_scheme("tail: cuts=2 spacers=[0]").is_err());
        assert!(parse_scheme("nonexistent-preset").is_err());
    }
}
