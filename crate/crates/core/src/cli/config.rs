//! Experiment files and feedback rules.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::montecarlo::CodebookMode;

/// TOML experiment file. Every key is optional; unknown keys are rejected.
///
/// ```toml
/// n_t = 4
/// users = 2
/// adc_bits = [3, 4, 5]
/// feedback_rule = "2(Nt-1)*b-12"   # or feedback_bits = [6, 12, 18]
/// snr_min = -20.0
/// snr_max = 40.0
/// snr_step = 5.0
/// trials = 1000
/// seed = 7
/// codebook_mode = "fresh"           # or "fixed"
/// noise_variance = 1.0
/// analytic = true
/// out = "fig4.csv"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub n_t: Option<usize>,
    pub users: Option<usize>,
    pub adc_bits: Option<Vec<u32>>,
    pub feedback_bits: Option<Vec<u32>>,
    pub feedback_rule: Option<String>,
    pub snr_min: Option<f64>,
    pub snr_max: Option<f64>,
    pub snr_step: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub codebook_mode: Option<CodebookMode>,
    pub noise_variance: Option<f64>,
    pub analytic: Option<bool>,
    pub out: Option<PathBuf>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Linear feedback rule `B = slope·b + offset`, parsed from expressions such
/// as `2(Nt-1)*b-12`, `6b - 12` or `8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackRule {
    pub slope: i64,
    pub offset: i64,
}

impl FeedbackRule {
    pub fn parse(expr: &str, n_t: usize) -> Result<Self> {
        let tokens = tokenize(expr)?;
        let mut p = Parser { tokens: &tokens, pos: 0, n_t: n_t as i64 };
        let (slope, offset) = p.expr()?;
        if p.pos != tokens.len() {
            return Err(Error::Config(format!("trailing input in feedback rule {expr:?}")));
        }
        Ok(Self { slope, offset })
    }

    pub fn apply(&self, adc_bits: u32) -> Result<u32> {
        let b = self.slope * adc_bits as i64 + self.offset;
        u32::try_from(b).map_err(|_| {
            Error::Config(format!("feedback rule gives B = {b} for b = {adc_bits}"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(i64),
    B,
    Nt,
    Plus,
    Minus,
    Star,
    Open,
    Close,
}

fn tokenize(expr: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token::Num(s.parse().map_err(|e| Error::Config(format!("{s}: {e}")))?));
                continue;
            }
            'b' => out.push(Token::B),
            'N' | 'n' if matches!(chars.get(i + 1), Some('t') | Some('T')) => {
                out.push(Token::Nt);
                i += 1;
            }
            '+' => out.push(Token::Plus),
            '-' => out.push(Token::Minus),
            '*' => out.push(Token::Star),
            '(' => out.push(Token::Open),
            ')' => out.push(Token::Close),
            other => {
                return Err(Error::Config(format!(
                    "unexpected {other:?} in feedback rule {expr:?}"
                )))
            }
        }
        i += 1;
    }
    Ok(out)
}

// Linear forms (coefficient of b, constant).
type Linear = (i64, i64);

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    n_t: i64,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Linear> {
        let mut acc = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                let (s, o) = self.term()?;
                (-s, -o)
            }
            _ => self.term()?,
        };
        while let Some(op) = self.peek().cloned() {
            let sign = match op {
                Token::Plus => 1,
                Token::Minus => -1,
                _ => break,
            };
            self.pos += 1;
            let (s, o) = self.term()?;
            acc = (acc.0 + sign * s, acc.1 + sign * o);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Linear> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => self.pos += 1,
                Some(Token::Num(_) | Token::B | Token::Nt | Token::Open) => {}
                _ => break,
            }
            let rhs = self.factor()?;
            acc = match (acc, rhs) {
                ((0, c), (s, o)) | ((s, o), (0, c)) => (s * c, o * c),
                _ => return Err(Error::Config("feedback rule must be linear in b".into())),
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Linear> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| Error::Config("feedback rule ends unexpectedly".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok((0, v)),
            Token::B => Ok((1, 0)),
            Token::Nt => Ok((0, self.n_t)),
            Token::Open => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(Error::Config("unbalanced parenthesis in feedback rule".into())),
                }
            }
            other => Err(Error::Config(format!("unexpected {other:?} in feedback rule"))),
        }
    }
}
