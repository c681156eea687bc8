//! Recursive-descent parser producing unchecked declarations.

use std::collections::BTreeMap;

use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::changes::Region;
use crate::diagnostics::SourceSpan;
use crate::events::{
    Anchor, Arm, BehaviorDecl, Branch, CmpOp, Comparison, Endpoint, EventSpec, GuardExpr,
    WapConstraint,
};
use crate::model::{Decl, StageKind};
use crate::sim::{Scenario, Tick};
use crate::time::{TimeUnit, TimeValue};

/// Parsing stops after this many syntax errors.
pub const MAX_ERRORS: usize = 20;

const TOP_LEVEL: [&str; 8] = [
    "thimac", "flow", "trigger", "region", "event", "behavior", "wap", "scenario",
];

/// Everything a file declares, before any semantic checking.
#[derive(Debug, Default)]
pub(crate) struct Ast {
    pub name: String,
    pub decls: Vec<Decl>,
    pub regions: Vec<(Region, SourceSpan)>,
    pub events: Vec<(EventSpec, SourceSpan)>,
    pub behavior: BehaviorDecl,
    pub constraints: Vec<(WapConstraint, SourceSpan)>,
    pub scenarios: Vec<(Scenario, SourceSpan)>,
}

/// Marks a failure that has already been recorded.
struct Failed;

type PResult<T> = Result<T, Failed>;

struct Parser<'f> {
    toks: Vec<Token>,
    pos: usize,
    file: &'f str,
    errors: Vec<ParseError>,
}

pub(crate) fn parse_ast(text: &str, file: &str) -> Result<Ast, Vec<ParseError>> {
    let mut p = Parser {
        toks: tokenize(text),
        pos: 0,
        file,
        errors: Vec::new(),
    };
    let ast = p.file();
    if p.errors.is_empty() {
        Ok(ast)
    } else {
        p.errors.truncate(MAX_ERRORS);
        Err(p.errors)
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        let t = &self.toks[self.pos];
        SourceSpan {
            file: self.file.to_string(),
            line: t.line,
            column: t.column,
            length: t.length,
        }
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn fail<T>(&mut self, expected: impl Into<String>) -> PResult<T> {
        let found = self.peek().to_string();
        self.fail_with(expected, found)
    }

    fn fail_with<T>(
        &mut self,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> PResult<T> {
        let span = self.span();
        self.errors.push(ParseError {
            span,
            expected: expected.into(),
            found: found.into(),
        });
        Err(Failed)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(format!("`{kw}`"))
        }
    }

    fn punct(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            self.fail(want.to_string())
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn integer(&mut self, what: &str) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Num { int: Some(n), .. } => {
                self.advance();
                Ok(n)
            }
            Tok::Num { text, .. } => self.fail_with(what, format!("number `{text}`")),
            _ => self.fail(what),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match self.peek().clone() {
            Tok::Num { value, .. } if value.is_finite() => {
                self.advance();
                Ok(value)
            }
            _ => self.fail("a number"),
        }
    }

    fn time(&mut self) -> PResult<TimeValue> {
        let magnitude = self.integer("a non-negative integer time")?;
        let unit_span = self.span();
        let unit = match self.peek().clone() {
            Tok::Ident(u) => match u.parse::<TimeUnit>() {
                Ok(unit) => unit,
                Err(_) => return self.fail("a time unit (us, ms or s)"),
            },
            _ => return self.fail("a time unit (us, ms or s)"),
        };
        match TimeValue::new(magnitude, unit) {
            Ok(t) => {
                self.advance();
                Ok(t)
            }
            Err(e) => {
                self.errors.push(ParseError {
                    span: unit_span,
                    expected: "a time that fits in 64-bit microseconds".into(),
                    found: e.to_string(),
                });
                Err(Failed)
            }
        }
    }

    /// Skips to the next top-level keyword outside any braces.
    fn recover(&mut self) {
        loop {
            let t = &self.toks[self.pos];
            let top = matches!(&t.tok, Tok::Ident(s) if TOP_LEVEL.contains(&s.as_str()));
            if t.tok == Tok::Eof || (t.depth == 0 && top) {
                return;
            }
            self.advance();
        }
    }

    fn file(&mut self) -> Ast {
        let mut ast = Ast::default();
        let header = self
            .keyword("model")
            .and_then(|_| self.string("a model name string"));
        match header {
            Ok(name) => ast.name = name,
            Err(Failed) => self.recover(),
        }
        while *self.peek() != Tok::Eof && self.errors.len() < MAX_ERRORS {
            let start = self.pos;
            let result = match self.peek() {
                Tok::Ident(kw) => match kw.as_str() {
                    "thimac" => self.thimac(None, &mut ast.decls),
                    "flow" => self.flow(&mut ast.decls),
                    "trigger" => self.trigger(&mut ast.decls),
                    "region" => self.region().map(|r| ast.regions.push(r)),
                    "event" => self.event().map(|e| ast.events.push(e)),
                    "behavior" => self.behavior(&mut ast.behavior),
                    "wap" => self.wap().map(|c| ast.constraints.push(c)),
                    "scenario" => self.scenario().map(|s| ast.scenarios.push(s)),
                    _ => self.fail("a declaration keyword"),
                },
                _ => self.fail("a declaration keyword"),
            };
            if result.is_err() {
                if self.pos == start {
                    self.advance();
                }
                self.recover();
            }
        }
        ast
    }

    fn thimac(&mut self, parent: Option<&str>, decls: &mut Vec<Decl>) -> PResult<()> {
        let span = self.span();
        self.keyword("thimac")?;
        let name = self.ident("a thimac name")?;
        let id = match parent {
            Some(p) => format!("{p}.{name}"),
            None => name,
        };
        decls.push(Decl::Thimac {
            id: id.clone(),
            parent: parent.map(str::to_string),
            span: Some(span),
        });
        self.punct(Tok::LBrace)?;
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    return Ok(());
                }
                Tok::Ident(kw) if kw == "thimac" => self.thimac(Some(&id), decls)?,
                Tok::Ident(kw) => match kw.parse::<StageKind>() {
                    Ok(kind) => {
                        let span = self.span();
                        self.advance();
                        let label = match self.peek() {
                            Tok::Str(_) => Some(self.string("a label")?),
                            _ => None,
                        };
                        let anchor = if self.eat(&Tok::At) {
                            let n = self.integer("an anchor number")?;
                            match u32::try_from(n) {
                                Ok(n) => Some(n),
                                Err(_) => {
                                    self.pos -= 1;
                                    return self
                                        .fail_with("an anchor number below 2^32", n.to_string());
                                }
                            }
                        } else {
                            None
                        };
                        decls.push(Decl::Stage {
                            owner: id.clone(),
                            kind,
                            label,
                            anchor,
                            span: Some(span),
                        });
                    }
                    Err(_) => return self.fail("`thimac`, a stage kind, or `}`"),
                },
                _ => return self.fail("`thimac`, a stage kind, or `}`"),
            }
        }
    }

    /// `Seg(.Seg)*.kind`
    fn path(&mut self) -> PResult<String> {
        let mut segments = vec![self.ident("a stage path")?];
        while *self.peek() == Tok::Dot {
            self.advance();
            segments.push(self.ident("a path segment")?);
        }
        let last = segments.last().map(String::as_str).unwrap_or_default();
        if segments.len() < 2 || last.parse::<StageKind>().is_err() {
            self.pos -= 1;
            return self.fail_with(
                "a stage path ending in create, receive, process, release or transfer",
                format!("`{}`", segments.join(".")),
            );
        }
        Ok(segments.join("."))
    }

    fn flow(&mut self, decls: &mut Vec<Decl>) -> PResult<()> {
        let span = self.span();
        self.keyword("flow")?;
        let mut from = self.path()?;
        self.punct(Tok::Arrow)?;
        loop {
            let to = self.path()?;
            decls.push(Decl::Flow {
                from: from.clone(),
                to: to.clone(),
                span: Some(span.clone()),
            });
            if !self.eat(&Tok::Arrow) {
                return Ok(());
            }
            from = to;
        }
    }

    fn trigger(&mut self, decls: &mut Vec<Decl>) -> PResult<()> {
        let span = self.span();
        self.keyword("trigger")?;
        let from = self.path()?;
        self.punct(Tok::DashArrow)?;
        let to = self.path()?;
        let join = if self.eat_keyword("join") {
            Some(self.ident("a join group name")?)
        } else {
            None
        };
        decls.push(Decl::Trigger {
            from,
            to,
            join,
            span: Some(span),
        });
        Ok(())
    }

    fn region(&mut self) -> PResult<(Region, SourceSpan)> {
        let span = self.span();
        self.keyword("region")?;
        let id = self.ident("a region name")?;
        self.punct(Tok::LBrace)?;
        let mut stages = vec![self.path()?];
        while self.eat(&Tok::Comma) {
            stages.push(self.path()?);
        }
        self.punct(Tok::RBrace)?;
        Ok((Region::new(id, stages), span))
    }

    fn event(&mut self) -> PResult<(EventSpec, SourceSpan)> {
        let span = self.span();
        self.keyword("event")?;
        let id = self.ident("an event name")?;
        self.keyword("region")?;
        let region = self.ident("a region name")?;
        let mut spec = EventSpec::new(id, region);
        if self.eat_keyword("duration") {
            spec = spec.with_duration(self.time()?);
        }
        Ok((spec, span))
    }

    fn behavior(&mut self, out: &mut BehaviorDecl) -> PResult<()> {
        self.keyword("behavior")?;
        self.punct(Tok::LBrace)?;
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(());
            }
            if self.is_keyword("repeat") && matches!(self.peek_at(1), Tok::Ident(_)) {
                self.advance();
                out.repeats.insert(self.ident("an event name")?);
            } else if self.is_keyword("branch") && matches!(self.peek_at(1), Tok::Ident(_)) {
                self.advance();
                out.branches.push(self.branch()?);
            } else {
                let from = self.ident("an edge, `repeat`, `branch`, or `}`")?;
                self.punct(Tok::Arrow)?;
                let to = self.ident("an event name")?;
                out.edges.push((from, to));
            }
        }
    }

    /// After `branch`: `E { when g -> E (, when g -> E)* [,] [else -> skip] }`
    fn branch(&mut self) -> PResult<Branch> {
        let at = self.ident("an event name")?;
        self.punct(Tok::LBrace)?;
        let mut arms = Vec::new();
        let mut else_skip = false;
        loop {
            self.keyword("when")?;
            let guard = self.guard()?;
            self.punct(Tok::Arrow)?;
            let to = self.ident("an event name")?;
            arms.push(Arm { guard, to });
            let comma = self.eat(&Tok::Comma);
            if self.is_keyword("when") {
                if !comma {
                    return self.fail("`,` between arms");
                }
                continue;
            }
            if self.eat_keyword("else") {
                self.punct(Tok::Arrow)?;
                self.keyword("skip")?;
                else_skip = true;
            }
            self.punct(Tok::RBrace)?;
            return Ok(Branch {
                at,
                arms,
                else_skip,
            });
        }
    }

    fn guard(&mut self) -> PResult<GuardExpr> {
        let mut terms = vec![self.comparison()?];
        while self.eat_keyword("and") {
            terms.push(self.comparison()?);
        }
        Ok(GuardExpr::new(terms))
    }

    fn comparison(&mut self) -> PResult<Comparison> {
        let measurement = self.ident("a measurement name")?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            _ => return self.fail("a comparison operator (<, <=, >, >=, ==)"),
        };
        self.advance();
        let threshold = self.number()?;
        Ok(Comparison {
            measurement,
            op,
            threshold,
        })
    }

    fn endpoint(&mut self) -> PResult<Endpoint> {
        let event = self.ident("an event name")?;
        self.punct(Tok::Dot)?;
        let anchor = if self.eat_keyword("start") {
            Anchor::Start
        } else if self.eat_keyword("finish") {
            Anchor::Finish
        } else {
            return self.fail("`start` or `finish`");
        };
        Ok(Endpoint { event, anchor })
    }

    /// `wap LATER - EARLIER <= T [warn ID]`
    fn wap(&mut self) -> PResult<(WapConstraint, SourceSpan)> {
        let span = self.span();
        self.keyword("wap")?;
        let later = self.endpoint()?;
        self.punct(Tok::Minus)?;
        let earlier = self.endpoint()?;
        self.punct(Tok::Le)?;
        let max_separation = self.time()?;
        let warning_id = if self.eat_keyword("warn") {
            self.ident("a warning name")?
        } else {
            WapConstraint::default_warning_id(&earlier.event, &later.event)
        };
        Ok((
            WapConstraint {
                earlier,
                later,
                max_separation,
                warning_id,
            },
            span,
        ))
    }

    fn scenario(&mut self) -> PResult<(Scenario, SourceSpan)> {
        let span = self.span();
        self.keyword("scenario")?;
        let name = self.ident("a scenario name")?;
        self.punct(Tok::LBrace)?;
        let mut ticks = Vec::new();
        while !self.eat(&Tok::RBrace) {
            self.keyword("tick")?;
            let time = self.time()?;
            self.punct(Tok::LBrace)?;
            let mut measurements = BTreeMap::new();
            let mut delays = BTreeMap::new();
            while !self.eat(&Tok::RBrace) {
                if self.is_keyword("delay") && matches!(self.peek_at(1), Tok::Ident(_)) {
                    self.advance();
                    let at = self.pos;
                    let event = self.ident("an event name")?;
                    let d = self.time()?;
                    if delays.insert(event.clone(), d).is_some() {
                        self.pos = at;
                        return self.fail_with(
                            "one delay per event and tick",
                            format!("second delay for `{event}`"),
                        );
                    }
                } else {
                    let at = self.pos;
                    let name = self.ident("a measurement, `delay`, or `}`")?;
                    self.punct(Tok::Eq)?;
                    let value = self.number()?;
                    if measurements.insert(name.clone(), value).is_some() {
                        self.pos = at;
                        return self.fail_with(
                            "one value per measurement and tick",
                            format!("second value for `{name}`"),
                        );
                    }
                }
            }
            ticks.push(Tick {
                time,
                measurements,
                delays,
            });
        }
        Ok((Scenario { name, ticks }, span))
    }
}
