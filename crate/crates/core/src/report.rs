//! Machine-checkable verdict reports.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LessThan,
    AtMost,
    GreaterThan,
    AtLeast,
    Equal,
}

impl Relation {
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::LessThan => measured < threshold,
            Relation::AtMost => measured <= threshold,
            Relation::GreaterThan => measured > threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Equal => measured == threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::LessThan => "<",
            Relation::AtMost => "<=",
            Relation::GreaterThan => ">",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        }
    }
}

/// One measured claim: `measured <relation> threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub description: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub name: String,
    pub claims: Vec<Claim>,
    /// Conjunction of all claims.
    pub overall: bool,
}

impl CounterexampleReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            claims: Vec::new(),
            overall: true,
        }
    }

    pub fn check(
        &mut self,
        description: impl Into<String>,
        measured: f64,
        relation: Relation,
        threshold: f64,
    ) -> bool {
        let pass = relation.holds(measured, threshold);
        self.claims.push(Claim {
            description: description.into(),
            measured,
            relation,
            threshold,
            pass,
        });
        self.overall &= pass;
        pass
    }

    /// Boolean claim, recorded as `measured == 1`.
    pub fn flag(&mut self, description: impl Into<String>, value: bool) -> bool {
        self.check(
            description,
            if value { 1.0 } else { 0.0 },
            Relation::Equal,
            1.0,
        )
    }

    /// Appends `other`'s claims, prefixing each description with its name.
    pub fn absorb(&mut self, other: &CounterexampleReport) {
        for c in &other.claims {
            let mut c = c.clone();
            c.description = format!("{}: {}", other.name, c.description);
            self.overall &= c.pass;
            self.claims.push(c);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "[{}] {}",
            if self.overall { "PASS" } else { "FAIL" },
            self.name
        )?;
        for c in &self.claims {
            writeln!(
                f,
                "  [{}] {}: {:.6e} {} {:.6e}",
                if c.pass { "ok" } else { "FAIL" },
                c.description,
                c.measured,
                c.relation.symbol(),
                c.threshold
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_conjunction() {
        let mut r = CounterexampleReport::new("demo");
        assert!(r.check("small", 1e-12, Relation::LessThan, 1e-10));
        assert!(r.overall);
        assert!(!r.check("large", 1.0, Relation::LessThan, 1e-10));
        assert!(r.flag("flag", true));
        assert!(!r.overall);
        assert_eq!(r.failures().count(), 1);

        let mut outer = CounterexampleReport::new("outer");
        outer.absorb(&r);
        assert!(!outer.overall);
        assert_eq!(outer.claims[1].description, "demo: large");
    }

    #[test]
    fn text_rendering() {
        let mut r = CounterexampleReport::new("demo");
        r.check("bound", 4.0, Relation::AtMost, 4.0);
        let text = r.to_string();
        assert!(text.starts_with("[PASS] demo"));
        assert!(text.contains("<="));
    }
}
