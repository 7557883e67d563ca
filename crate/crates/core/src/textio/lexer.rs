use super::SourceError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Identifier starting with a letter or underscore.
    Word(String),
    /// Identifier or numeric literal starting with a digit or a minus sign.
    NumWord(String),
    /// Double-quoted string, escapes resolved.
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    Colon,
    Pipe,
    Eq,
    Arrow,
    LArrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) | Tok::NumWord(w) => format!("`{w}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LArrow => "`<-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub(crate) fn error(self, message: impl Into<String>) -> SourceError {
        SourceError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Lexer<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
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

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    /// Reads `[A-Za-z0-9_-]*`, leaving a `-` that starts `->` in place.
    fn ident_tail(&mut self, out: &mut String) {
        while let Some(c) = self.peek() {
            if !is_ident_continue(c) || (c == '-' && self.peek2() == Some('>')) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }

    fn digits(&mut self, out: &mut String) {
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            out.push(c);
            self.bump();
        }
    }

    /// A `.` followed by a digit continues a decimal literal rather than
    /// ending the declaration.
    fn fraction(&mut self, out: &mut String) {
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            out.push('.');
            self.bump();
            self.digits(out);
        }
    }

    fn string(&mut self, start: Pos) -> Result<String, SourceError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(start.error("unterminated string literal")),
                Some('"') => return Ok(out),
                Some('\\') => {
                    let esc = self.pos();
                    match self.bump() {
                        Some('"') => out.push('"'),
                        Some('\\') => out.push('\\'),
                        Some('n') => out.push('\n'),
                        Some('t') => out.push('\t'),
                        Some('r') => out.push('\r'),
                        Some(c) => return Err(esc.error(format!("unknown escape `\\{c}`"))),
                        None => return Err(start.error("unterminated string literal")),
                    }
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, SourceError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok(Spanned { tok: Tok::Eof, pos });
        };
        let tok = match c {
            '(' => self.single(Tok::LParen),
            ')' => self.single(Tok::RParen),
            ',' => self.single(Tok::Comma),
            '.' => self.single(Tok::Dot),
            '/' => self.single(Tok::Slash),
            ':' => self.single(Tok::Colon),
            '|' => self.single(Tok::Pipe),
            '=' => self.single(Tok::Eq),
            '"' => Tok::Str(self.string(pos)?),
            '-' if self.peek2() == Some('>') => {
                self.bump();
                self.bump();
                Tok::Arrow
            }
            '-' if self.peek2().is_some_and(|c| c.is_ascii_digit()) => {
                let mut s = String::from("-");
                self.bump();
                self.digits(&mut s);
                self.fraction(&mut s);
                Tok::NumWord(s)
            }
            '<' if self.peek2() == Some('-') => {
                self.bump();
                self.bump();
                Tok::LArrow
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                self.digits(&mut s);
                if self.peek().is_some_and(is_ident_continue) {
                    self.ident_tail(&mut s);
                } else {
                    self.fraction(&mut s);
                }
                Tok::NumWord(s)
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                self.ident_tail(&mut s);
                if s == "_" && self.peek() == Some(':') {
                    return Err(pos.error("labeled nulls (`_:`) cannot appear in input"));
                }
                Tok::Word(s)
            }
            other => return Err(pos.error(format!("unexpected character `{other}`"))),
        };
        Ok(Spanned { tok, pos })
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.bump();
        tok
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, SourceError> {
    let mut lexer = Lexer {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}

/// True when `s` lexes as a single bare identifier or numeric token.
pub(crate) fn is_bare_token(s: &str) -> bool {
    match tokenize(s) {
        Ok(toks) => {
            toks.len() == 2 && matches!(&toks[0].tok, Tok::Word(w) | Tok::NumWord(w) if w == s)
        }
        Err(_) => false,
    }
}

/// True when `s` lexes as a single token that a query reads as a constant.
pub(crate) fn is_bare_query_constant(s: &str) -> bool {
    is_bare_token(s) && s.starts_with(|c: char| c.is_ascii_digit() || c == '-')
}
