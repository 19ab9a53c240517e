use super::{Subtree, Tree};
use crate::{Error, Result};

/// Parses one `;`-terminated Newick tree.
///
/// Accepts quoted labels (`'it''s'`), bracketed comments, internal node
/// labels and non-negative branch lengths.
pub fn parse_newick(text: &str) -> Result<Tree> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    let root = p.subtree()?;
    p.skip_ws();
    if !p.eat(';') {
        return Err(p.err("expected `;`"));
    }
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing characters after `;`"));
    }
    Tree::from_subtree(root).map_err(|e| Error::Newick {
        offset: 0,
        msg: e.to_string(),
    })
}

pub(super) fn quote_label(label: &str) -> String {
    let plain = !label.is_empty()
        && !label
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Newick {
            offset: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.pos += c.len_utf8(),
                Some('[') => match self.src[self.pos..].find(']') {
                    Some(end) => self.pos += end + 1,
                    None => return,
                },
                _ => return,
            }
        }
    }

    fn subtree(&mut self) -> Result<Subtree> {
        let mut children = Vec::new();
        if self.eat('(') {
            loop {
                self.skip_ws();
                children.push(self.subtree()?);
                self.skip_ws();
                if self.eat(',') {
                    continue;
                }
                if self.eat(')') {
                    break;
                }
                return Err(self.err("expected `,` or `)`"));
            }
        }
        self.skip_ws();
        let label = self.label()?;
        self.skip_ws();
        let length = if self.eat(':') {
            self.skip_ws();
            Some(self.length()?)
        } else {
            None
        };
        if children.is_empty() && label.is_none() {
            return Err(self.err("unlabelled leaf"));
        }
        Ok(Subtree {
            label,
            length,
            children,
        })
    }

    fn label(&mut self) -> Result<Option<String>> {
        if self.eat('\'') {
            let mut out = String::new();
            loop {
                match self.peek() {
                    None => return Err(self.err("unterminated quoted label")),
                    Some('\'') => {
                        self.pos += 1;
                        if self.eat('\'') {
                            out.push('\'');
                        } else {
                            return Ok(Some(out));
                        }
                    }
                    Some(c) => {
                        out.push(c);
                        self.pos += c.len_utf8();
                    }
                }
            }
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || "()[]':;,".contains(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        Ok((self.pos > start).then(|| self.src[start..self.pos].to_string()))
    }

    fn length(&mut self) -> Result<f64> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || "+-.eE".contains(c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| Error::Newick {
            offset: start,
            msg: format!("invalid branch length {text:?}"),
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Newick {
                offset: start,
                msg: format!("negative or non-finite branch length {text}"),
            });
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_lengths_preserved() {
        let t = parse_newick("((a:1,b:2):0.5,c:1,d:1);").unwrap();
        let a = t.find_leaf("a").unwrap();
        let b = t.find_leaf("b").unwrap();
        assert_eq!(t.node(a).length, Some(1.0));
        assert_eq!(t.node(b).length, Some(2.0));
        assert_eq!(t.node(t.node(a).parent.unwrap()).length, Some(0.5));
        assert_eq!(t.to_newick(), "((a:1,b:2):0.5,c:1,d:1);");
    }

    #[test]
    fn duplicate_labels() {
        let err = parse_newick("(a,a);").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(parse_newick("((a,b);"), Err(Error::Newick { offset: 6, .. })));
        assert!(matches!(parse_newick("(a,b);x"), Err(Error::Newick { offset: 6, .. })));
        assert!(matches!(parse_newick("(a,b)"), Err(Error::Newick { offset: 5, .. })));
        assert!(parse_newick("(a,b:-1);").is_err());
        assert!(parse_newick("(a,);").is_err());
    }

    #[test]
    fn quoted_labels_and_comments() {
        let t = parse_newick("('Old Norse [oldn1244]':1,'it''s'[comment],c) root;").unwrap();
        assert!(t.find_leaf("Old Norse [oldn1244]").is_some());
        assert!(t.find_leaf("it's").is_some());
        assert_eq!(t.node(t.root()).label.as_deref(), Some("root"));
        let again = parse_newick(&t.to_newick()).unwrap();
        assert_eq!(again, t);
    }
}
