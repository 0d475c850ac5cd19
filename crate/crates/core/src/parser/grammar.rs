use std::collections::HashSet;
use std::sync::Arc;

use indexmap::IndexMap;

use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, SystemSpec};
use crate::control::{NamedRequirement, Requirement};
use crate::terms::{
    plant_violations, supervisor_violations, Action, ActionPattern, ActionSet, BoolExpr,
    ChannelClass, CmpOp, DataExpr, Declarations, Domain, Term, TermRef, Update, Value,
    VariableDecl,
};

type PResult<T> = Result<T, Diagnostic>;

const KEYWORDS: &[&str] = &[
    "channel",
    "controllable",
    "uncontrollable",
    "var",
    "proc",
    "plant",
    "supervisor",
    "supervised",
    "encap",
    "incomplete",
    "requirement",
    "disabled",
    "true",
    "false",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    decls: Declarations,
    processes: IndexMap<String, TermRef>,
    plant: Option<(String, usize, usize)>,
    supervisor: Option<(String, usize, usize)>,
    supervised_encap: Option<ActionSet>,
    requirements: Vec<NamedRequirement>,
    /// Processes whose definition failed to parse; references to them are
    /// not reported again.
    failed: HashSet<String>,
    /// Set when the current error only follows from an earlier one.
    knock_on: bool,
}

pub fn parse_spec(src: &str) -> Result<SystemSpec, Vec<Diagnostic>> {
    let toks = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        decls: Declarations::new(),
        processes: IndexMap::new(),
        plant: None,
        supervisor: None,
        supervised_encap: None,
        requirements: Vec::new(),
        failed: HashSet::new(),
        knock_on: false,
    };
    let mut diags = Vec::new();
    while *p.peek() != Tok::Eof {
        let start = p.pos;
        if let Err(d) = p.item() {
            if !std::mem::take(&mut p.knock_on) {
                diags.push(d);
            }
            // Errors found after the closing `;` leave nothing to skip.
            if p.pos == start || p.toks[p.pos - 1].tok != Tok::Semi {
                p.recover();
            }
        }
    }
    let end = p.toks.last().map(|t| (t.line, t.col)).unwrap_or((1, 1));
    let plant = match p.plant.take() {
        Some(pl) => Some(pl),
        None if p.failed.is_empty() => {
            diags.push(Diagnostic { line: end.0, col: end.1, message: "no plant declared".into() });
            None
        }
        None => None,
    };
    if let Some((name, line, col)) = &plant {
        for v in plant_violations(&p.processes[name], &p.decls) {
            diags.push(Diagnostic {
                line: *line,
                col: *col,
                message: format!("plant `{name}` is not a plant term: {v}"),
            });
        }
    }
    if let Some((name, line, col)) = &p.supervisor {
        for v in supervisor_violations(&p.processes[name], &p.decls) {
            diags.push(Diagnostic {
                line: *line,
                col: *col,
                message: format!("supervisor `{name}` is not a supervisor term: {v}"),
            });
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(SystemSpec {
        decls: Arc::new(p.decls),
        processes: p.processes,
        plant: plant.map(|p| p.0).unwrap_or_default(),
        supervisor: p.supervisor.map(|s| s.0),
        supervised_encap: p.supervised_encap,
        requirements: p.requirements,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, pos: usize, message: impl Into<String>) -> Diagnostic {
        let t = &self.toks[pos.min(self.toks.len() - 1)];
        Diagnostic { line: t.line, col: t.col, message: message.into() }
    }

    fn err_here(&self, message: impl Into<String>) -> Diagnostic {
        self.err_at(self.pos, message)
    }

    fn expected(&self, what: &str) -> Diagnostic {
        self.err_here(format!("expected {what}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.expected(&t.describe()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.expected(&format!("`{kw}`")))
        }
    }

    /// A non-keyword identifier and its token index.
    fn name(&mut self, what: &str) -> PResult<(String, usize)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let at = self.pos;
                self.bump();
                Ok((s, at))
            }
            _ => Err(self.expected(what)),
        }
    }

    fn recover(&mut self) {
        while !matches!(self.peek(), Tok::Semi | Tok::Eof) {
            self.bump();
        }
        self.eat(&Tok::Semi);
    }

    fn item(&mut self) -> PResult<()> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.expected("a declaration")),
        };
        self.bump();
        match kw.as_str() {
            "channel" => self.channel_decl(),
            "var" => self.var_decl(),
            "proc" => self.proc_decl(),
            "plant" | "supervisor" => {
                let (name, at) = self.name("a process name")?;
                if !self.processes.contains_key(&name) {
                    self.knock_on = self.failed.contains(&name);
                    return Err(self.err_at(at, format!("unknown process `{name}`")));
                }
                self.expect(Tok::Semi)?;
                let t = &self.toks[at];
                let entry = Some((name, t.line, t.col));
                if kw == "plant" {
                    if self.plant.is_some() {
                        return Err(self.err_at(at, "plant declared twice"));
                    }
                    self.plant = entry;
                } else {
                    if self.supervisor.is_some() {
                        return Err(self.err_at(at, "supervisor declared twice"));
                    }
                    self.supervisor = entry;
                }
                Ok(())
            }
            "supervised" => {
                self.expect_kw("encap")?;
                let at = self.pos;
                let h = self.action_set()?;
                self.expect(Tok::Semi)?;
                if self.supervised_encap.is_some() {
                    return Err(self.err_at(at, "supervised encapsulation declared twice"));
                }
                self.supervised_encap = Some(h);
                Ok(())
            }
            "requirement" => self.requirement_decl(),
            other => Err(self.err_at(self.pos - 1, format!("unknown declaration `{other}`"))),
        }
    }

    fn channel_decl(&mut self) -> PResult<()> {
        let class = if self.is_kw("controllable") {
            ChannelClass::Controllable
        } else if self.is_kw("uncontrollable") {
            ChannelClass::Uncontrollable
        } else {
            return Err(self.expected("`controllable` or `uncontrollable`"));
        };
        self.bump();
        loop {
            let (name, at) = self.name("a channel name")?;
            self.decls
                .add_channel(&name, class)
                .map_err(|e| self.err_at(at, e.to_string()))?;
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)
    }

    fn signed_int(&mut self) -> PResult<Value> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.expected("an integer")),
        }
    }

    fn var_decl(&mut self) -> PResult<()> {
        let (name, at) = self.name("a variable name")?;
        self.expect(Tok::Colon)?;
        let domain = if self.eat(&Tok::LBrace) {
            let mut names = Vec::new();
            loop {
                let (n, nat) = self.name("an enumeration constant")?;
                if names.contains(&n) {
                    return Err(self.err_at(nat, format!("duplicate constant `{n}`")));
                }
                names.push(n);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            Domain::Enum(names)
        } else {
            let lo = self.signed_int()?;
            self.expect(Tok::DotDot)?;
            let hi = self.signed_int()?;
            Domain::Range { lo, hi }
        };
        self.expect(Tok::Eq)?;
        let vat = self.pos;
        let initial = match (&domain, self.peek().clone()) {
            (Domain::Enum(names), Tok::Ident(s)) => {
                self.bump();
                names
                    .iter()
                    .position(|n| *n == s)
                    .map(|i| i as Value)
                    .ok_or_else(|| self.err_at(vat, format!("`{s}` is not a constant of `{name}`")))?
            }
            _ => self.signed_int()?,
        };
        self.expect(Tok::Semi)?;
        self.decls
            .add_variable(VariableDecl { name, domain, initial })
            .map_err(|e| self.err_at(at, e.to_string()))?;
        Ok(())
    }

    fn proc_decl(&mut self) -> PResult<()> {
        let (name, at) = self.name("a process name")?;
        if self.processes.contains_key(&name) {
            return Err(self.err_at(at, format!("process `{name}` defined twice")));
        }
        self.expect(Tok::Eq)?;
        let t = self.term().inspect_err(|_| {
            self.failed.insert(name.clone());
        })?;
        self.expect(Tok::Semi)?;
        self.processes.insert(name, t);
        Ok(())
    }

    fn requirement_decl(&mut self) -> PResult<()> {
        let name = if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Colon {
            let (n, at) = self.name("a requirement name")?;
            if self.requirements.iter().any(|r| r.name == n) {
                return Err(self.err_at(at, format!("requirement `{n}` defined twice")));
            }
            self.bump();
            n
        } else {
            let mut k = self.requirements.len() + 1;
            while self.requirements.iter().any(|r| r.name == format!("R{k}")) {
                k += 1;
            }
            format!("R{k}")
        };
        let requirement = if self.at_action() {
            let action = self.action()?;
            self.expect(Tok::FatArrow)?;
            let formula = self.bool_expr()?;
            Requirement::EventImplies { action, formula }
        } else {
            let formula = self.bool_expr()?;
            if *self.peek() == Tok::FatArrow && self.is_kw_at(1, "disabled") {
                self.bump();
                self.bump();
                let action = self.action()?;
                Requirement::StateExcludesEvent { formula, action }
            } else {
                Requirement::Invariant(formula)
            }
        };
        self.expect(Tok::Semi)?;
        self.requirements.push(NamedRequirement { name, requirement });
        Ok(())
    }

    // ---- actions -------------------------------------------------------

    fn at_action(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && matches!(self.peek_at(1), Tok::Bang | Tok::Question)
    }

    fn arity(&mut self) -> PResult<u32> {
        if let Tok::Ident(s) = self.peek().clone() {
            if let Some(digits) = s.strip_prefix('_') {
                if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                    let n = digits
                        .parse::<u32>()
                        .map_err(|_| self.err_here(format!("arity `{digits}` is too large")))?;
                    self.bump();
                    return Ok(n);
                }
                return Err(self.err_here(format!("malformed arity annotation `{s}`")));
            }
        }
        Ok(1)
    }

    fn action(&mut self) -> PResult<Action> {
        let (name, at) = self.name("a channel name")?;
        let channel = self
            .decls
            .channel_id(&name)
            .ok_or_else(|| self.err_at(at, format!("unknown channel `{name}`")))?;
        let (mut senders, mut receivers) = (0, 0);
        let mut marked = false;
        if self.eat(&Tok::Bang) {
            senders = self.arity()?;
            marked = true;
        }
        if self.eat(&Tok::Question) {
            receivers = self.arity()?;
            marked = true;
        }
        if !marked {
            return Err(self.expected("`!` or `?` after the channel name"));
        }
        Ok(Action::new(channel, senders, receivers))
    }

    fn action_set(&mut self) -> PResult<ActionSet> {
        self.expect(Tok::LBrace)?;
        let mut pats = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                if self.is_kw("incomplete") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let (name, at) = self.name("a channel name")?;
                    let channel = self
                        .decls
                        .channel_id(&name)
                        .ok_or_else(|| self.err_at(at, format!("unknown channel `{name}`")))?;
                    self.expect(Tok::Comma)?;
                    let k = self.signed_int()?;
                    if k < 1 {
                        return Err(self.err_here("party count must be positive"));
                    }
                    self.expect(Tok::RParen)?;
                    pats.push(ActionPattern::Incomplete { channel, parties: k as u32 });
                } else {
                    pats.push(ActionPattern::Exact(self.action()?));
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }
        Ok(ActionSet::new(pats))
    }

    fn update(&mut self) -> PResult<Update> {
        if !self.eat(&Tok::LBracket) {
            return Ok(Update::empty());
        }
        let start = self.pos;
        let mut items = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                let (name, at) = self.name("a variable name")?;
                let v = self
                    .decls
                    .var_id(&name)
                    .ok_or_else(|| self.err_at(at, format!("unknown variable `{name}`")))?;
                self.expect(Tok::Assign)?;
                items.push((v, self.data()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Update::new(items).map_err(|v| {
            self.err_at(start, format!("variable `{}` updated twice", self.decls.variable(v).name))
        })
    }

    // ---- process terms -------------------------------------------------

    fn term(&mut self) -> PResult<TermRef> {
        let mut t = self.alt()?;
        while self.eat(&Tok::Bar2) {
            t = Term::par(t, self.alt()?);
        }
        Ok(t)
    }

    fn alt(&mut self) -> PResult<TermRef> {
        let mut t = self.seq()?;
        while self.eat(&Tok::Plus) {
            t = Term::alt(t, self.seq()?);
        }
        Ok(t)
    }

    fn seq(&mut self) -> PResult<TermRef> {
        let mut t = self.unary()?;
        while self.eat(&Tok::Dot) {
            t = Term::seq(t, self.unary()?);
        }
        Ok(t)
    }

    fn unary(&mut self) -> PResult<TermRef> {
        if self.at_action() {
            let a = self.action()?;
            let f = self.update()?;
            self.expect(Tok::Dot)?;
            let body = self.unary()?;
            return Ok(Term::prefix(a, f, body));
        }
        // `0 + ...` and `1 + ...` are always terms.
        let literal_summand =
            matches!(self.peek(), Tok::Int(0 | 1)) && matches!(self.peek_at(1), Tok::Plus | Tok::Bar2);
        if !literal_summand && self.looks_like_guard() {
            let save = self.pos;
            if let Ok(phi) = self.bool_expr() {
                if self.eat(&Tok::Arrow) {
                    let body = self.unary()?;
                    return Ok(Term::guard(phi, body));
                }
            }
            self.pos = save;
        }
        self.postfix()
    }

    /// Cheap scan for `->` at nesting depth 0 before any token that cannot
    /// occur inside a guard formula.
    fn looks_like_guard(&self) -> bool {
        let mut depth = 0i32;
        for t in &self.toks[self.pos..] {
            match t.tok {
                Tok::Arrow if depth == 0 => return true,
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                Tok::Dot
                | Tok::DotDot
                | Tok::Semi
                | Tok::Eof
                | Tok::LBracket
                | Tok::RBracket
                | Tok::LBrace
                | Tok::RBrace
                | Tok::Question
                | Tok::Comma
                | Tok::Colon
                | Tok::Assign
                | Tok::Arrow => return false,
                _ => {}
            }
        }
        false
    }

    fn postfix(&mut self) -> PResult<TermRef> {
        let mut t = self.atom()?;
        while self.eat(&Tok::Star) {
            t = Term::star(t);
        }
        Ok(t)
    }

    fn atom(&mut self) -> PResult<TermRef> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Term::deadlock())
            }
            Tok::Int(1) => {
                self.bump();
                Ok(Term::skip())
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "encap" => {
                self.bump();
                let h = self.action_set()?;
                self.expect(Tok::LParen)?;
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Term::encap(h, t))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let t = self
                    .processes
                    .get(&s)
                    .cloned()
                    .ok_or_else(|| {
                        self.knock_on = self.failed.contains(&s);
                        self.err_here(format!("unknown process `{s}`"))
                    })?;
                self.bump();
                Ok(t)
            }
            _ => Err(self.expected("a process term")),
        }
    }

    // ---- guards and data -----------------------------------------------

    fn bool_expr(&mut self) -> PResult<BoolExpr> {
        let l = self.bool_or()?;
        if *self.peek() == Tok::FatArrow && !self.is_kw_at(1, "disabled") {
            self.bump();
            let r = self.bool_expr()?;
            return Ok(BoolExpr::implies(l, r));
        }
        Ok(l)
    }

    fn bool_or(&mut self) -> PResult<BoolExpr> {
        let mut e = self.bool_and()?;
        while self.eat(&Tok::Bar2) {
            e = BoolExpr::or(e, self.bool_and()?);
        }
        Ok(e)
    }

    fn bool_and(&mut self) -> PResult<BoolExpr> {
        let mut e = self.bool_unary()?;
        while self.eat(&Tok::Amp2) {
            e = BoolExpr::and(e, self.bool_unary()?);
        }
        Ok(e)
    }

    fn bool_unary(&mut self) -> PResult<BoolExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(BoolExpr::not(self.bool_unary()?));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(BoolExpr::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(BoolExpr::False);
        }
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(e) = self.bool_expr() {
                if self.eat(&Tok::RParen) {
                    return Ok(e);
                }
            }
            self.pos = save;
        }
        let l = self.data()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            _ => return Err(self.expected("a comparison operator")),
        };
        self.bump();
        let r = self.data()?;
        Ok(BoolExpr::cmp(op, l, r))
    }

    fn data(&mut self) -> PResult<DataExpr> {
        let mut e = self.data_term()?;
        loop {
            if self.eat(&Tok::Plus) {
                e = DataExpr::Add(Box::new(e), Box::new(self.data_term()?));
            } else if self.eat(&Tok::Minus) {
                e = DataExpr::Sub(Box::new(e), Box::new(self.data_term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn data_term(&mut self) -> PResult<DataExpr> {
        let mut e = self.data_factor()?;
        while self.eat(&Tok::Star) {
            e = DataExpr::Mul(Box::new(e), Box::new(self.data_factor()?));
        }
        Ok(e)
    }

    fn data_factor(&mut self) -> PResult<DataExpr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(DataExpr::Lit(v))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(v) = *self.peek() {
                    self.bump();
                    return Ok(DataExpr::Lit(-v));
                }
                let inner = self.data_factor()?;
                Ok(DataExpr::Sub(Box::new(DataExpr::Lit(0)), Box::new(inner)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.data()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let e = if let Some(v) = self.decls.var_id(&s) {
                    DataExpr::Var(v)
                } else if let Some(c) = self.decls.constant(&s) {
                    DataExpr::Lit(c)
                } else {
                    return Err(self.err_here(format!("unknown variable `{s}`")));
                };
                self.bump();
                Ok(e)
            }
            _ => Err(self.expected("a data expression")),
        }
    }
}
