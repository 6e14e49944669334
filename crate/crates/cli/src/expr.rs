//! Tiny boundary-modulus expression grammar.
//!
//! ```text
//! expr   := factor { "*" factor }
//! factor := atom [ "^" number ]
//! atom   := "abs" "(" "1" "-" "zeta" [ "^" uint ] ")"
//!         | "dist"
//!         | number
//!         | "(" expr ")"
//! ```
//!
//! `abs(1 - zeta^k)` contributes the k roots of unity as boundary zeros;
//! `dist` is the arclength distance to the set supplied alongside. Anything
//! richer needs a descriptor file.

use anyhow::{anyhow, bail, Result};
use std::f64::consts::PI;

/// Parsed modulus: `scale · Π |ζ − e^{iτ}|^p · d(ζ,E)^q`.
#[derive(Debug, Clone, Default)]
pub struct ModulusExpr {
    pub scale: f64,
    pub roots: Vec<(f64, f64)>,
    pub dist_power: f64,
}

pub fn parse_modulus(text: &str) -> Result<ModulusExpr> {
    let mut p = Parser { text: text.as_bytes(), pos: 0 };
    let mut acc = ModulusExpr { scale: 1.0, roots: Vec::new(), dist_power: 0.0 };
    p.skip_ws();
    loop {
        let f = p.factor()?;
        acc.scale *= f.scale;
        acc.roots.extend(f.roots);
        acc.dist_power += f.dist_power;
        p.skip_ws();
        if p.eat(b'*') {
            continue;
        }
        break;
    }
    p.skip_ws();
    if p.pos != p.text.len() {
        bail!("trailing input at byte {}", p.pos);
    }
    if !acc.scale.is_finite() || acc.scale <= 0.0 {
        bail!("modulus scale must be positive");
    }
    Ok(acc)
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.pos < self.text.len() && self.text[self.pos] == c {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_digit()
                || matches!(self.text[self.pos], b'.' | b'e' | b'E' | b'-' | b'+'))
        {
            // Stop a sign that is not part of an exponent.
            if matches!(self.text[self.pos], b'-' | b'+')
                && self.pos > start
                && !matches!(self.text[self.pos - 1], b'e' | b'E')
            {
                break;
            }
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| anyhow!("expected a number at byte {start}"))
    }

    fn factor(&mut self) -> Result<ModulusExpr> {
        let mut base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            let e = self.number()?;
            base.scale = base.scale.powf(e);
            for r in &mut base.roots {
                r.1 *= e;
            }
            base.dist_power *= e;
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ModulusExpr> {
        self.skip_ws();
        if self.eat_word("abs") {
            if !self.eat(b'(') {
                bail!("expected ( after abs");
            }
            if !self.eat_word("1") {
                bail!("abs factors must have the form abs(1 - zeta^k)");
            }
            if !self.eat(b'-') {
                bail!("abs factors must have the form abs(1 - zeta^k)");
            }
            if !self.eat_word("zeta") {
                bail!("abs factors must have the form abs(1 - zeta^k)");
            }
            let k = if self.eat(b'^') { self.number()? as u32 } else { 1 };
            if !self.eat(b')') {
                bail!("expected ) to close abs(...)");
            }
            if k == 0 {
                bail!("zeta exponent must be >= 1");
            }
            // |1 − ζ^k| = Π_{j<k} |ζ − e^{2πij/k}|.
            let roots = (0..k)
                .map(|j| (2.0 * PI * j as f64 / k as f64, 1.0))
                .collect();
            return Ok(ModulusExpr { scale: 1.0, roots, dist_power: 0.0 });
        }
        if self.eat_word("dist") {
            return Ok(ModulusExpr { scale: 1.0, roots: Vec::new(), dist_power: 1.0 });
        }
        if self.eat(b'(') {
            let mut acc = ModulusExpr { scale: 1.0, roots: Vec::new(), dist_power: 0.0 };
            loop {
                let f = self.factor()?;
                acc.scale *= f.scale;
                acc.roots.extend(f.roots);
                acc.dist_power += f.dist_power;
                if !self.eat(b'*') {
                    break;
                }
            }
            if !self.eat(b')') {
                bail!("expected )");
            }
            return Ok(acc);
        }
        let v = self.number()?;
        Ok(ModulusExpr { scale: v, roots: Vec::new(), dist_power: 0.0 })
    }
}
