//! The `.spdom` domain description format.
//!
//! ```text
//! # comments run to end of line
//! alternatives v w x y z
//!
//! agent 1 {
//!   fix x > z
//!   when x > y => z > w, z > v
//! }
//! agent 2 { single-peaked v w x y z }
//! agent 3 {
//!   rankings {
//!     x y z v w
//!     y x z v w
//!   }
//! }
//! ```
//!
//! Statements end at a newline or `;`. An agent body is exactly one of:
//!
//! * restriction statements: `fix A > B` (non-conditional) and
//!   `when A1 > B1, A2 > B2 => C > D, E > F` (conditional; several
//!   conclusions share the antecedent). Statements are conjunctive and
//!   applied to the universal domain.
//! * one generator: `universal`, `single-peaked AXIS...`,
//!   `single-dipped AXIS...`, `self-preferring LABEL`,
//!   `juror-bias FAVOURED... > DISFAVOURED...`.
//! * a `rankings { ... }` block, one ranking per line, best first. Labels
//!   may be concatenated when every label has one character.
//!
//! The serializer always writes `rankings` blocks with space-separated
//! labels, rankings in canonical order, LF line endings.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::classifier::{Restriction, RestrictionMap};
use crate::domain::{generate_domain, DomainKind, PreferenceDomain, ProductDomain};
use crate::error::{Error, Result};
use crate::pairs::{OrderedPair, PairSet};
use crate::ranking::{AltSet, Alternatives, Ranking};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentBody {
    Statements(Vec<Restriction>),
    Generator(DomainKind),
    Rankings(Vec<Ranking>),
}

#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub label: String,
    pub line: usize,
    pub body: AgentBody,
    pub domain: PreferenceDomain,
    /// The restriction map written in the file, for statement bodies.
    pub hint: Option<RestrictionMap>,
}

#[derive(Debug, Clone)]
pub struct DomainFile {
    pub alternatives: Alternatives,
    pub agents: Vec<AgentSpec>,
}

impl DomainFile {
    pub fn product(&self) -> Result<ProductDomain> {
        ProductDomain::new(self.agents.iter().map(|a| a.domain.clone()).collect())
    }

    pub fn domains(&self) -> Vec<PreferenceDomain> {
        self.agents.iter().map(|a| a.domain.clone()).collect()
    }

    pub fn hints(&self) -> Vec<Option<RestrictionMap>> {
        self.agents.iter().map(|a| a.hint.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Gt,
    Arrow,
    Comma,
    Open,
    Close,
    /// newline or `;`
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let content = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = content.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let single = match c {
                '>' => Some(Tok::Gt),
                ',' => Some(Tok::Comma),
                '{' => Some(Tok::Open),
                '}' => Some(Tok::Close),
                ';' => Some(Tok::End),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Token { tok, line, col });
                i += 1;
            } else if c == '=' {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Token {
                        tok: Tok::Arrow,
                        line,
                        col,
                    });
                    i += 2;
                } else {
                    return Err(Error::parse(line, col, "expected `=>`"));
                }
            } else if c.is_whitespace() {
                i += 1;
            } else {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !matches!(chars[i], '>' | ',' | '{' | '}' | ';' | '=' | '#')
                {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    line,
                    col,
                });
            }
        }
        out.push(Token {
            tok: Tok::End,
            line,
            col: chars.len() + 1,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        match self.peek() {
            Some(t) => Error::parse(t.line, t.col, msg),
            None => Error::parse(self.eof_line, 1, msg),
        }
    }

    fn skip_ends(&mut self) {
        while matches!(self.peek(), Some(Token { tok: Tok::End, .. })) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token> {
        match self.peek() {
            Some(t) if t.tok == want => Ok(self.next().expect("peeked")),
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Word(w),
                line,
                col,
            }) => {
                let r = (w.clone(), *line, *col);
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn at_word(&self) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(_), .. }))
    }

    fn at(&self, tok: &Tok) -> bool {
        matches!(self.peek(), Some(t) if &t.tok == tok)
    }

    /// Words up to the end of the statement (or a `}`), consuming a trailing `End`.
    fn words_to_end(&mut self) -> Result<Vec<(String, usize, usize)>> {
        let mut ws = Vec::new();
        while self.at_word() {
            ws.push(self.word("label")?);
        }
        self.end_statement()?;
        Ok(ws)
    }

    fn end_statement(&mut self) -> Result<()> {
        if self.at(&Tok::End) {
            self.pos += 1;
            Ok(())
        } else if self.at(&Tok::Close) || self.peek().is_none() {
            Ok(())
        } else {
            Err(self.err_here("unexpected token"))
        }
    }
}

fn lookup(alts: &Alternatives, (w, line, col): &(String, usize, usize)) -> Result<u8> {
    alts.id(w)
        .ok_or_else(|| Error::parse(*line, *col, format!("undeclared alternative `{w}`")))
}

fn pair(alts: &Alternatives, p: &mut Parser) -> Result<OrderedPair> {
    let a = p.word("alternative")?;
    p.expect(Tok::Gt, "`>`")?;
    let b = p.word("alternative")?;
    let (ia, ib) = (lookup(alts, &a)?, lookup(alts, &b)?);
    if ia == ib {
        return Err(Error::parse(a.1, a.2, "pair needs two distinct alternatives"));
    }
    Ok(OrderedPair::new(ia, ib))
}

fn pair_list(alts: &Alternatives, p: &mut Parser) -> Result<PairSet> {
    let mut s = PairSet::EMPTY.with(pair(alts, p)?);
    while p.at(&Tok::Comma) {
        p.pos += 1;
        s.insert(pair(alts, p)?);
    }
    Ok(s)
}

fn axis(alts: &Alternatives, words: &[(String, usize, usize)]) -> Result<Vec<u8>> {
    words.iter().map(|w| lookup(alts, w)).collect()
}

fn alt_set(alts: &Alternatives, words: &[(String, usize, usize)]) -> Result<AltSet> {
    words.iter().map(|w| lookup(alts, w)).collect()
}

fn parse_rankings_block(alts: &Alternatives, p: &mut Parser) -> Result<Vec<Ranking>> {
    p.expect(Tok::Open, "`{` after `rankings`")?;
    let mut out = Vec::new();
    loop {
        p.skip_ends();
        if p.at(&Tok::Close) {
            p.pos += 1;
            break;
        }
        let (line, col) = match p.peek() {
            Some(t) => (t.line, t.col),
            None => return Err(p.err_here("unterminated rankings block")),
        };
        let words = p.words_to_end()?;
        if words.is_empty() {
            return Err(p.err_here("expected a ranking"));
        }
        let text: Vec<&str> = words.iter().map(|w| w.0.as_str()).collect();
        let r = alts
            .parse_ranking(&text.join(" "))
            .or_else(|e| {
                if text.len() == 1 {
                    alts.parse_ranking(text[0])
                } else {
                    Err(e)
                }
            })
            .map_err(|e| Error::parse(line, col, e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

fn parse_agent_body(alts: &Alternatives, p: &mut Parser) -> Result<AgentBody> {
    let mut statements: Vec<Restriction> = Vec::new();
    let mut other: Option<AgentBody> = None;
    loop {
        p.skip_ends();
        if p.at(&Tok::Close) {
            p.pos += 1;
            break;
        }
        let (kw, line, col) = p.word("statement")?;
        if other.is_some() || (!statements.is_empty() && kw != "fix" && kw != "when") {
            return Err(Error::parse(
                line,
                col,
                "an agent body is either statements, one generator, or one rankings block",
            ));
        }
        match kw.as_str() {
            "fix" => {
                let pr = pair(alts, p)?;
                p.end_statement()?;
                statements.push(Restriction::NonConditional(pr));
            }
            "when" => {
                let antecedent = pair_list(alts, p)?;
                p.expect(Tok::Arrow, "`=>`")?;
                let conclusions = pair_list(alts, p)?;
                p.end_statement()?;
                for c in conclusions {
                    statements.push(Restriction::Conditional {
                        antecedent,
                        conclusion: c,
                    });
                }
            }
            "rankings" => {
                other = Some(AgentBody::Rankings(parse_rankings_block(alts, p)?));
                p.end_statement()?;
            }
            "universal" => {
                p.end_statement()?;
                other = Some(AgentBody::Generator(DomainKind::Universal));
            }
            "single-peaked" | "single-dipped" => {
                let ws = p.words_to_end()?;
                let ax = axis(alts, &ws)?;
                other = Some(AgentBody::Generator(if kw == "single-peaked" {
                    DomainKind::SinglePeaked(ax)
                } else {
                    DomainKind::SingleDipped(ax)
                }));
            }
            "self-preferring" => {
                let w = p.word("alternative")?;
                p.end_statement()?;
                other = Some(AgentBody::Generator(DomainKind::SelfPreferring(lookup(
                    alts, &w,
                )?)));
            }
            "juror-bias" => {
                let mut fav = Vec::new();
                while p.at_word() {
                    fav.push(p.word("alternative")?);
                }
                p.expect(Tok::Gt, "`>` between favoured and disfavoured sets")?;
                let dis = p.words_to_end()?;
                other = Some(AgentBody::Generator(DomainKind::JurorBias {
                    favoured: alt_set(alts, &fav)?,
                    disfavoured: alt_set(alts, &dis)?,
                }));
            }
            _ => return Err(Error::parse(line, col, format!("unknown statement `{kw}`"))),
        }
    }
    Ok(other.unwrap_or(AgentBody::Statements(statements)))
}

fn build_domain(body: &AgentBody, m: usize) -> Result<(PreferenceDomain, Option<RestrictionMap>)> {
    match body {
        AgentBody::Statements(stmts) => {
            let mut base = PairSet::EMPTY;
            let mut conds = Vec::new();
            for s in stmts {
                match *s {
                    Restriction::NonConditional(p) => base.insert(p),
                    Restriction::Conditional {
                        antecedent,
                        conclusion,
                    } => conds.push((antecedent, PairSet::EMPTY.with(conclusion))),
                }
            }
            let d = PreferenceDomain::universal(m)?
                .filter(|r| stmts.iter().all(|s| !s.excludes(r)))
                .ok_or(Error::EmptyDomain)?;
            Ok((d, RestrictionMap::new(m, base, conds).ok()))
        }
        AgentBody::Generator(kind) => Ok((generate_domain(kind, m)?, None)),
        AgentBody::Rankings(rs) => Ok((PreferenceDomain::new(m, rs.iter().copied())?, None)),
    }
}

/// Parses a `.spdom` file.
pub fn parse_domain_file(text: &str) -> Result<DomainFile> {
    let toks = tokenize(text)?;
    let eof_line = text.lines().count().max(1);
    let mut p = Parser {
        toks,
        pos: 0,
        eof_line,
    };
    p.skip_ends();
    let (kw, line, col) = p.word("`alternatives`")?;
    if kw != "alternatives" {
        return Err(Error::parse(line, col, "file must start with `alternatives`"));
    }
    let labels = p.words_to_end()?;
    let alternatives = Alternatives::new(labels.iter().map(|w| w.0.clone()))
        .map_err(|e| Error::parse(line, col, e.to_string()))?;
    let m = alternatives.len();

    let mut agents = Vec::new();
    let mut seen = HashSet::new();
    loop {
        p.skip_ends();
        if p.peek().is_none() {
            break;
        }
        let (kw, line, col) = p.word("`agent`")?;
        if kw != "agent" {
            return Err(Error::parse(line, col, format!("expected `agent`, found `{kw}`")));
        }
        let (label, lline, lcol) = p.word("agent label")?;
        if !seen.insert(label.clone()) {
            return Err(Error::parse(lline, lcol, format!("duplicate agent `{label}`")));
        }
        p.expect(Tok::Open, "`{`")?;
        let body = parse_agent_body(&alternatives, &mut p)?;
        let (domain, hint) = build_domain(&body, m).map_err(|e| match e {
            Error::EmptyDomain | Error::Unsatisfiable(_) => Error::Unsatisfiable(format!(
                "agent `{label}` (line {line}): restrictions leave no ranking"
            )),
            Error::Parse { .. } => e,
            other => Error::parse(line, col, format!("agent `{label}`: {other}")),
        })?;
        agents.push(AgentSpec {
            label,
            line,
            body,
            domain,
            hint,
        });
    }
    if agents.is_empty() {
        return Err(p.err_here("no agents declared"));
    }
    Ok(DomainFile {
        alternatives,
        agents,
    })
}

/// A complete file with one agent, labelled `1`, as an explicit rankings block.
pub fn serialize_domain(alts: &Alternatives, d: &PreferenceDomain) -> String {
    serialize_agents(alts, &[("1", d)])
}

pub fn serialize_agents(alts: &Alternatives, agents: &[(&str, &PreferenceDomain)]) -> String {
    let mut s = String::new();
    writeln!(s, "alternatives {}", alts.labels().join(" ")).unwrap();
    for (label, d) in agents {
        writeln!(s, "agent {label} {{").unwrap();
        writeln!(s, "  rankings {{").unwrap();
        for r in d.rankings() {
            let words: Vec<&str> = r.order().iter().map(|&a| alts.label(a)).collect();
            writeln!(s, "    {}", words.join(" ")).unwrap();
        }
        writeln!(s, "  }}").unwrap();
        writeln!(s, "}}").unwrap();
    }
    s
}

/// Restriction statements (`fix`, `when ... =>`) for a map, one per line.
pub fn serialize_map_statements(alts: &Alternatives, map: &RestrictionMap) -> String {
    let list = |s: PairSet| {
        s.iter()
            .map(|p| alts.format_pair(p))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut s = String::new();
    for p in map.base() {
        writeln!(s, "fix {}", alts.format_pair(p)).unwrap();
    }
    for c in map.conditionals() {
        writeln!(s, "when {} => {}", list(c.antecedent), list(c.conclusions)).unwrap();
    }
    s
}

/// A complete file whose agents are given by restriction maps.
pub fn serialize_maps(alts: &Alternatives, agents: &[(&str, &RestrictionMap)]) -> String {
    let mut s = String::new();
    writeln!(s, "alternatives {}", alts.labels().join(" ")).unwrap();
    for (label, map) in agents {
        writeln!(s, "agent {label} {{").unwrap();
        for line in serialize_map_statements(alts, map).lines() {
            writeln!(s, "  {line}").unwrap();
        }
        writeln!(s, "}}").unwrap();
    }
    s
}
