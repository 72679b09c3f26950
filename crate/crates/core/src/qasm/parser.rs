use std::f64::consts::PI;

use super::lexer::{Token, TokenKind};
use super::{ParseDiagnostic, SourceSpan, MAX_REGISTER_SIZE};
use crate::circuit::{validate, GateInstance, GateKind, Measurement, Operation, QuantumCircuit};

const MAX_EXPR_DEPTH: usize = 64;
const MAX_DIAGNOSTICS: usize = 100;

struct Register {
    name: String,
    size: usize,
}

/// A resolved operand: one index, or the whole register.
#[derive(Clone, Copy)]
enum Operand {
    Single(usize),
    Whole,
}

/// Aborts the current statement; the diagnostic has already been recorded.
struct Abort;

type Step<T> = Result<T, Abort>;

pub(crate) struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    diagnostics: Vec<ParseDiagnostic>,
    qreg: Option<Register>,
    creg: Option<Register>,
    gates: Vec<GateInstance>,
    measures: Vec<Measurement>,
    /// Span of the measurement of each qubit, once measured.
    measured_at: Vec<Option<SourceSpan>>,
    statement_start: usize,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(tokens: &'t [Token]) -> Self {
        Parser {
            tokens,
            pos: 0,
            diagnostics: Vec::new(),
            qreg: None,
            creg: None,
            gates: Vec::new(),
            measures: Vec::new(),
            measured_at: Vec::new(),
            statement_start: 0,
        }
    }

    pub(crate) fn run(mut self) -> (Option<QuantumCircuit>, Vec<ParseDiagnostic>) {
        if self.header().is_err() {
            self.synchronize();
        }
        while !self.at_eof() && self.error_count() < MAX_DIAGNOSTICS {
            self.statement_start = self.pos;
            if self.statement().is_err() {
                self.synchronize();
            }
        }
        let circuit = self.finish();
        (circuit, self.diagnostics)
    }

    fn finish(&mut self) -> Option<QuantumCircuit> {
        let Some(qreg) = &self.qreg else {
            let span = self.peek().span;
            self.error(span, "missing qreg declaration");
            return None;
        };
        if self.error_count() > 0 {
            return None;
        }
        let mut ops: Vec<Operation> = self.gates.drain(..).map(Operation::Gate).collect();
        ops.extend(self.measures.drain(..).map(Operation::Measure));
        let circuit = QuantumCircuit {
            num_qubits: qreg.size,
            ops,
        };
        let span = self.peek().span;
        let violations = validate(&circuit);
        for v in &violations {
            self.error(span, v.message.clone());
        }
        violations.is_empty().then_some(circuit)
    }

    fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic::error(span, message));
    }

    fn fail<T>(&mut self, span: SourceSpan, message: impl Into<String>) -> Step<T> {
        self.error(span, message);
        Err(Abort)
    }

    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> &'t Token {
        let tok = self.peek();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if &self.peek().kind == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Step<&'t Token> {
        let tok = self.peek();
        if tok.kind == kind {
            Ok(self.advance())
        } else {
            self.fail(
                tok.span,
                format!("expected {}, found {}", kind.describe(), tok.kind.describe()),
            )
        }
    }

    fn ident(&mut self) -> Step<(&'t str, SourceSpan)> {
        let tok = self.peek();
        match &tok.kind {
            TokenKind::Ident(name) => {
                self.advance();
                Ok((name.as_str(), tok.span))
            }
            other => self.fail(tok.span, format!("expected an identifier, found {}", other.describe())),
        }
    }

    fn integer(&mut self) -> Step<(usize, SourceSpan)> {
        let tok = self.peek();
        match &tok.kind {
            TokenKind::Int(text) => {
                self.advance();
                match text.parse() {
                    Ok(v) => Ok((v, tok.span)),
                    Err(_) => self.fail(tok.span, format!("integer '{text}' is too large")),
                }
            }
            other => self.fail(tok.span, format!("expected an integer, found {}", other.describe())),
        }
    }

    /// Skips past the end of the current statement, treating a `{ ... }`
    /// block as part of it.
    fn synchronize(&mut self) {
        // Semantic errors are raised after the closing ';' was consumed.
        if self.pos > self.statement_start && self.tokens[self.pos - 1].kind == TokenKind::Semicolon {
            return;
        }
        let mut depth = 0usize;
        loop {
            match self.advance().kind {
                TokenKind::Eof => return,
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return;
                    }
                }
                TokenKind::Semicolon if depth == 0 => return,
                _ => {}
            }
        }
    }

    fn header(&mut self) -> Step<()> {
        let tok = self.peek();
        match &tok.kind {
            TokenKind::Ident(s) if s == "OPENQASM" => {
                self.advance();
            }
            other => {
                return self.fail(
                    tok.span,
                    format!("expected 'OPENQASM 2.0;' header, found {}", other.describe()),
                )
            }
        }
        let tok = self.advance();
        match &tok.kind {
            TokenKind::Real(v) | TokenKind::Int(v) if v.parse::<f64>() == Ok(2.0) => {}
            TokenKind::Real(v) | TokenKind::Int(v) => {
                return self.fail(tok.span, format!("unsupported OpenQASM version '{v}'"));
            }
            other => return self.fail(tok.span, format!("expected a version number, found {}", other.describe())),
        }
        self.expect(TokenKind::Semicolon)?;
        Ok(())
    }

    fn statement(&mut self) -> Step<()> {
        let (keyword, span) = self.ident()?;
        match keyword {
            "include" => self.include(),
            "qreg" => self.qreg_decl(span),
            "creg" => self.creg_decl(span),
            "barrier" => self.barrier(span),
            "measure" => self.measure(span),
            "gate" | "opaque" | "if" | "reset" | "U" => {
                self.fail(span, format!("unsupported statement '{keyword}'"))
            }
            "OPENQASM" => self.fail(span, "duplicate OPENQASM header"),
            name => self.gate(name, span),
        }
    }

    fn include(&mut self) -> Step<()> {
        let tok = self.advance();
        match &tok.kind {
            TokenKind::Str(path) if path == "qelib1.inc" => {}
            TokenKind::Str(path) => {
                return self.fail(tok.span, format!("cannot resolve include \"{path}\""));
            }
            other => return self.fail(tok.span, format!("expected a file name, found {}", other.describe())),
        }
        self.expect(TokenKind::Semicolon)?;
        Ok(())
    }

    fn register_decl(&mut self) -> Step<Register> {
        let (name, _) = self.ident()?;
        self.expect(TokenKind::LBracket)?;
        let (size, size_span) = self.integer()?;
        self.expect(TokenKind::RBracket)?;
        self.expect(TokenKind::Semicolon)?;
        if size == 0 || size > MAX_REGISTER_SIZE {
            return self.fail(
                size_span,
                format!("register size must be between 1 and {MAX_REGISTER_SIZE}, got {size}"),
            );
        }
        Ok(Register {
            name: name.to_string(),
            size,
        })
    }

    fn qreg_decl(&mut self, span: SourceSpan) -> Step<()> {
        let reg = self.register_decl()?;
        if self.qreg.is_some() {
            return self.fail(span, "only one qreg declaration is supported");
        }
        if self.creg.as_ref().is_some_and(|c| c.name == reg.name) {
            return self.fail(span, format!("register name '{}' is already used", reg.name));
        }
        self.measured_at = vec![None; reg.size];
        self.qreg = Some(reg);
        Ok(())
    }

    fn creg_decl(&mut self, span: SourceSpan) -> Step<()> {
        let reg = self.register_decl()?;
        if self.creg.is_some() {
            return self.fail(span, "only one creg declaration is supported");
        }
        if self.qreg.as_ref().is_some_and(|q| q.name == reg.name) {
            return self.fail(span, format!("register name '{}' is already used", reg.name));
        }
        self.creg = Some(reg);
        Ok(())
    }

    /// `name` or `name[index]` against the quantum (`classical == false`) or
    /// classical register.
    fn operand(&mut self, classical: bool) -> Step<(Operand, SourceSpan)> {
        let (name, start) = self.ident()?;
        let kind_word = if classical { "classical" } else { "quantum" };
        let reg = if classical { &self.creg } else { &self.qreg };
        let (reg_name, size) = match reg {
            Some(r) if r.name == name => (r.name.clone(), r.size),
            _ => return self.fail(start, format!("unknown {kind_word} register '{name}'")),
        };
        if !self.eat(&TokenKind::LBracket) {
            return Ok((Operand::Whole, start));
        }
        let (index, index_span) = self.integer()?;
        let close = self.expect(TokenKind::RBracket)?;
        let length = if close.span.line == start.line {
            close.span.column + 1 - start.column
        } else {
            start.length
        };
        let span = SourceSpan::new(start.line, start.column, length);
        if index >= size {
            return self.fail(
                index_span,
                format!("index {index} out of range for register {reg_name}[{size}]"),
            );
        }
        Ok((Operand::Single(index), span))
    }

    fn operand_list(&mut self) -> Step<Vec<(Operand, SourceSpan)>> {
        let mut list = vec![self.operand(false)?];
        while self.eat(&TokenKind::Comma) {
            list.push(self.operand(false)?);
        }
        Ok(list)
    }

    fn barrier(&mut self, span: SourceSpan) -> Step<()> {
        self.operand_list()?;
        self.expect(TokenKind::Semicolon)?;
        self.diagnostics
            .push(ParseDiagnostic::warning(span, "barrier discarded; barriers are not represented"));
        Ok(())
    }

    fn measure(&mut self, span: SourceSpan) -> Step<()> {
        let (src, src_span) = self.operand(false)?;
        self.expect(TokenKind::Arrow)?;
        let (dst, dst_span) = self.operand(true)?;
        self.expect(TokenKind::Semicolon)?;
        let pairs: Vec<(usize, usize)> = match (src, dst) {
            (Operand::Single(q), Operand::Single(c)) => vec![(q, c)],
            (Operand::Whole, Operand::Whole) => {
                let (nq, nc) = (self.qreg_size(), self.creg.as_ref().map_or(0, |c| c.size));
                if nq != nc {
                    return self.fail(span, format!("cannot measure {nq} qubits into {nc} classical bits"));
                }
                (0..nq).map(|i| (i, i)).collect()
            }
            _ => {
                let at = if matches!(src, Operand::Whole) { src_span } else { dst_span };
                return self.fail(at, "measure operands must both be registers or both be indexed");
            }
        };
        for (qubit, clbit) in pairs {
            if let Some(prev) = self.measured_at[qubit] {
                return self.fail(
                    span,
                    format!("qubit q[{qubit}] already measured at line {}", prev.line),
                );
            }
            if self.measures.iter().any(|m| m.clbit == clbit) {
                return self.fail(dst_span, format!("classical bit reuse: c[{clbit}] written twice"));
            }
            self.measured_at[qubit] = Some(span);
            self.measures.push(Measurement { qubit, clbit });
        }
        Ok(())
    }

    fn qreg_size(&self) -> usize {
        self.qreg.as_ref().map_or(0, |r| r.size)
    }

    fn gate(&mut self, name: &str, span: SourceSpan) -> Step<()> {
        let Some(kind) = GateKind::from_name(name) else {
            return self.fail(span, format!("unknown gate '{name}'"));
        };
        let mut params = Vec::new();
        if self.eat(&TokenKind::LParen) {
            if self.peek().kind != TokenKind::RParen {
                params.push(self.angle()?);
                while self.eat(&TokenKind::Comma) {
                    params.push(self.angle()?);
                }
            }
            self.expect(TokenKind::RParen)?;
        }
        if params.len() != kind.param_count() {
            return self.fail(
                span,
                format!("gate '{name}' expects {} parameter(s), got {}", kind.param_count(), params.len()),
            );
        }
        let operands = self.operand_list()?;
        self.expect(TokenKind::Semicolon)?;
        if operands.len() != kind.arity() {
            return self.fail(
                span,
                format!("gate '{name}' expects {} qubit(s), got {}", kind.arity(), operands.len()),
            );
        }
        let targets: Vec<Vec<usize>> = match operands.as_slice() {
            [(Operand::Whole, _)] => (0..self.qreg_size()).map(|q| vec![q]).collect(),
            _ => {
                let mut qubits = Vec::with_capacity(operands.len());
                for (op, op_span) in &operands {
                    match op {
                        Operand::Single(q) => qubits.push(*q),
                        Operand::Whole => {
                            return self.fail(
                                *op_span,
                                "register broadcast is only supported for single-qubit gates",
                            )
                        }
                    }
                }
                vec![qubits]
            }
        };
        for qubits in targets {
            if let Some(&q) = qubits.iter().find(|&&q| self.measured_at[q].is_some()) {
                return self.fail(span, format!("gate '{name}' acts on q[{q}] after it was measured"));
            }
            match GateInstance::new(kind, qubits, params.clone()) {
                Ok(g) => self.gates.push(g),
                Err(e) => return self.fail(span, e.to_string()),
            }
        }
        Ok(())
    }

    fn angle(&mut self) -> Step<f64> {
        let start = self.peek().span;
        let value = self.expr(0)?;
        if !value.is_finite() {
            return self.fail(start, "angle expression is not a finite number");
        }
        Ok(value)
    }

    fn expr(&mut self, depth: usize) -> Step<f64> {
        let mut acc = self.term(depth)?;
        loop {
            if self.eat(&TokenKind::Plus) {
                acc += self.term(depth)?;
            } else if self.eat(&TokenKind::Minus) {
                acc -= self.term(depth)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self, depth: usize) -> Step<f64> {
        let mut acc = self.unary(depth)?;
        loop {
            if self.eat(&TokenKind::Star) {
                acc *= self.unary(depth)?;
            } else if self.eat(&TokenKind::Slash) {
                acc /= self.unary(depth)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Step<f64> {
        if depth > MAX_EXPR_DEPTH {
            let span = self.peek().span;
            return self.fail(span, "expression nested too deeply");
        }
        if self.eat(&TokenKind::Minus) {
            return Ok(-self.unary(depth + 1)?);
        }
        if self.eat(&TokenKind::Plus) {
            return self.unary(depth + 1);
        }
        let base = self.atom(depth)?;
        if self.eat(&TokenKind::Caret) {
            return Ok(base.powf(self.unary(depth + 1)?));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Step<f64> {
        let tok = self.advance();
        match &tok.kind {
            TokenKind::Int(text) | TokenKind::Real(text) => match text.parse::<f64>() {
                Ok(v) => Ok(v),
                Err(_) => self.fail(tok.span, format!("invalid number '{text}'")),
            },
            TokenKind::Ident(name) if name == "pi" => Ok(PI),
            TokenKind::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return self.fail(tok.span, format!("unknown identifier '{name}' in expression")),
                };
                self.expect(TokenKind::LParen)?;
                let arg = self.expr(depth + 1)?;
                self.expect(TokenKind::RParen)?;
                Ok(f(arg))
            }
            TokenKind::LParen => {
                let v = self.expr(depth + 1)?;
                self.expect(TokenKind::RParen)?;
                Ok(v)
            }
            other => self.fail(tok.span, format!("expected an expression, found {}", other.describe())),
        }
    }
}
