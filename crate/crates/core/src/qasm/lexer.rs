use super::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Ident(String),
    Int(String),
    Real(String),
    Str(String),
    Semicolon,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LBrace,
    RBrace,
    Equals,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier '{s}'"),
            TokenKind::Int(s) | TokenKind::Real(s) => format!("number '{s}'"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::Semicolon => "';'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::Arrow => "'->'".into(),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Caret => "'^'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::Equals => "'='".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

pub(crate) struct LexError {
    pub span: SourceSpan,
    pub message: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, buf: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek().filter(|&c| pred(c)) {
            buf.push(c);
            self.bump();
        }
    }
}

/// Splits `source` into tokens. Lexing stops at the first bad character.
pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        // Skip whitespace and comments.
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') => {
                    let mut ahead = cur.chars.clone();
                    ahead.next();
                    match ahead.next() {
                        Some('/') => {
                            while cur.peek().is_some_and(|c| c != '\n') {
                                cur.bump();
                            }
                        }
                        Some('*') => {
                            let (line, column) = (cur.line, cur.column);
                            cur.bump();
                            cur.bump();
                            let mut prev = '\0';
                            loop {
                                match cur.bump() {
                                    Some('/') if prev == '*' => break,
                                    Some(c) => prev = c,
                                    None => {
                                        return Err(LexError {
                                            span: SourceSpan::new(line, column, 2),
                                            message: "unterminated block comment".into(),
                                        })
                                    }
                                }
                            }
                        }
                        _ => break,
                    }
                }
                _ => break,
            }
        }

        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: SourceSpan::new(line, column, 0),
            });
            return Ok(tokens);
        };
        let mut text = String::from(c);
        let kind = match c {
            ';' => TokenKind::Semicolon,
            ',' => TokenKind::Comma,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '+' => TokenKind::Plus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '^' => TokenKind::Caret,
            '=' => TokenKind::Equals,
            '-' if cur.peek() == Some('>') => {
                cur.bump();
                text.push('>');
                TokenKind::Arrow
            }
            '-' => TokenKind::Minus,
            '"' => {
                text.clear();
                cur.eat_while(&mut text, |c| c != '"' && c != '\n');
                if cur.bump() != Some('"') {
                    return Err(LexError {
                        span: SourceSpan::new(line, column, text.chars().count() + 1),
                        message: "unterminated string literal".into(),
                    });
                }
                let kind = TokenKind::Str(text.clone());
                tokens.push(Token {
                    kind,
                    span: SourceSpan::new(line, column, text.chars().count() + 2),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                cur.eat_while(&mut text, |c| c.is_ascii_alphanumeric() || c == '_');
                TokenKind::Ident(text.clone())
            }
            c if c.is_ascii_digit() || c == '.' => lex_number(&mut cur, &mut text, line, column)?,
            other => {
                return Err(LexError {
                    span: SourceSpan::new(line, column, 1),
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        tokens.push(Token {
            kind,
            span: SourceSpan::new(line, column, text.chars().count()),
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>, text: &mut String, line: usize, column: usize) -> Result<TokenKind, LexError> {
    let mut real = text == ".";
    cur.eat_while(text, |c| c.is_ascii_digit());
    if !real && cur.peek() == Some('.') {
        real = true;
        text.push('.');
        cur.bump();
        cur.eat_while(text, |c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        real = true;
        text.push('e');
        cur.bump();
        if let Some(sign) = cur.peek().filter(|&c| c == '+' || c == '-') {
            text.push(sign);
            cur.bump();
        }
        let before = text.len();
        cur.eat_while(text, |c| c.is_ascii_digit());
        if text.len() == before {
            return Err(LexError {
                span: SourceSpan::new(line, column, text.chars().count()),
                message: "exponent has no digits".into(),
            });
        }
    }
    if text == "." {
        return Err(LexError {
            span: SourceSpan::new(line, column, 1),
            message: "unexpected character '.'".into(),
        });
    }
    Ok(if real {
        TokenKind::Real(text.clone())
    } else {
        TokenKind::Int(text.clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).ok().unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn measure_statement() {
        assert_eq!(
            kinds("measure q[0] -> c[1];"),
            vec![
                TokenKind::Ident("measure".into()),
                TokenKind::Ident("q".into()),
                TokenKind::LBracket,
                TokenKind::Int("0".into()),
                TokenKind::RBracket,
                TokenKind::Arrow,
                TokenKind::Ident("c".into()),
                TokenKind::LBracket,
                TokenKind::Int("1".into()),
                TokenKind::RBracket,
                TokenKind::Semicolon,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn numbers_and_comments() {
        assert_eq!(
            kinds("2.0 // trailing\n1e-3 /* block\n */ .5 7"),
            vec![
                TokenKind::Real("2.0".into()),
                TokenKind::Real("1e-3".into()),
                TokenKind::Real(".5".into()),
                TokenKind::Int("7".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("x q[0];\n  v q[1];").ok().unwrap();
        assert_eq!(toks[0].span, SourceSpan::new(1, 1, 1));
        assert_eq!(toks[6].span, SourceSpan::new(2, 3, 1));
    }

    #[test]
    fn bad_input_reports_position() {
        let err = tokenize("x q[0];\n$").err().unwrap();
        assert_eq!(err.span, SourceSpan::new(2, 1, 1));
        assert!(tokenize("\"open").is_err());
        assert!(tokenize("/* never closed").is_err());
        assert!(tokenize("1e+").is_err());
    }
}
