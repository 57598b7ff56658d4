use super::ast::*;
use super::lexer::{lex, Tok};
use super::{Diagnostic, Pos};

pub fn parse(text: &str) -> Result<SiteDoc, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let mut items = Vec::new();
    while p.peek() != &Tok::Eof {
        items.push(p.item()?);
    }
    Ok(SiteDoc { items })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const ITEM_HINT: &str =
    "a document is a sequence of `category`, `poset`, `functor`, `coverage on`, `topology on`, `indexed`, `presheaf`, `fibration` or `map` blocks";

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, what: &str, hint: &str) -> Result<T, Diagnostic> {
        Err(Diagnostic::new(self.pos(), format!("expected {what}, found {}", self.peek().describe()), hint))
    }

    fn expect(&mut self, t: Tok, hint: &str) -> Result<(), Diagnostic> {
        if self.peek() == &t {
            self.next();
            Ok(())
        } else {
            self.error(&t.describe(), hint)
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str, hint: &str) -> Result<Ident, Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.next().1;
                Ok(Ident { name, pos })
            }
            _ => self.error(what, hint),
        }
    }

    fn keyword(&mut self, kw: &str, hint: &str) -> Result<(), Diagnostic> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.error(&format!("`{kw}`"), hint),
        }
    }

    fn peek_keyword(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s.as_str()),
            _ => None,
        }
    }

    fn item(&mut self) -> Result<Item, Diagnostic> {
        let Some(kw) = self.peek_keyword().map(str::to_string) else {
            return self.error("a block keyword", ITEM_HINT);
        };
        match kw.as_str() {
            "category" => self.category().map(Item::Category),
            "poset" => self.poset().map(Item::Poset),
            "functor" => self.functor().map(Item::Functor),
            "coverage" | "topology" => self.site().map(Item::Site),
            "indexed" => self.indexed().map(Item::Indexed),
            "presheaf" => self.presheaf().map(Item::Presheaf),
            "fibration" | "map" => self.map().map(Item::Map),
            _ => self.error("a block keyword", ITEM_HINT),
        }
    }

    /// Comma-separated identifiers up to (not including) `close`.
    fn list(&mut self, close: &Tok, what: &str) -> Result<Vec<Ident>, Diagnostic> {
        let mut out = Vec::new();
        if self.peek() == close {
            return Ok(out);
        }
        loop {
            out.push(self.ident(what, "separate entries with `,`")?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn category(&mut self) -> Result<CategoryDecl, Diagnostic> {
        self.next();
        let name = self.ident("a category name", "write `category NAME { .. }`")?;
        if self.eat(&Tok::Eq) {
            let builtin = self.ident("a builtin category", "use `terminal`, `discrete(..)`, `chaotic(..)` or `cyclic(n)`")?;
            let mut args = Vec::new();
            if self.eat(&Tok::LParen) {
                args = self.list(&Tok::RParen, "an argument")?;
                self.expect(Tok::RParen, "close the argument list with `)`")?;
            }
            self.expect(Tok::Semi, "end the declaration with `;`")?;
            return Ok(CategoryDecl { name, body: CategoryBody::Builtin { builtin, args } });
        }
        self.expect(Tok::LBrace, "open the category body with `{` or write `= builtin;`")?;
        let (mut objects, mut identities, mut morphisms, mut relations) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        const HINT: &str = "category bodies contain `objects:`, `identities:`, `morphisms:` and `compose:` lines";
        while !self.eat(&Tok::RBrace) {
            let section = self.ident("a section label", HINT)?;
            self.expect(Tok::Colon, "follow the section label with `:`")?;
            match section.name.as_str() {
                "objects" => objects.extend(self.list(&Tok::Semi, "an object name")?),
                "identities" => identities.extend(self.list(&Tok::Semi, "a morphism name")?),
                "morphisms" => {
                    if self.peek() != &Tok::Semi {
                        loop {
                            let name = self.ident("a morphism name", "write `f: a -> b`")?;
                            self.expect(Tok::Colon, "write `f: a -> b`")?;
                            let dom = self.ident("a domain object", "write `f: a -> b`")?;
                            self.expect(Tok::Arrow, "write `f: a -> b`")?;
                            let cod = self.ident("a codomain object", "write `f: a -> b`")?;
                            morphisms.push(MorDecl { name, dom, cod });
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                }
                "compose" => {
                    if self.peek() != &Tok::Semi {
                        loop {
                            let lhs = self.path()?;
                            self.expect(Tok::Eq, "write a relation as `g . f = h`")?;
                            let rhs = self.path()?;
                            relations.push(Relation { lhs, rhs });
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                }
                _ => return Err(Diagnostic::new(section.pos, format!("unknown section `{}`", section.name), HINT)),
            }
            self.expect(Tok::Semi, "end each section with `;`")?;
        }
        Ok(CategoryDecl { name, body: CategoryBody::Presented { objects, identities, morphisms, relations } })
    }

    fn path(&mut self) -> Result<Vec<Ident>, Diagnostic> {
        let mut out = vec![self.ident("a morphism name", "write a path as `g . f`")?];
        while self.eat(&Tok::Dot) {
            out.push(self.ident("a morphism name", "write a path as `g . f`")?);
        }
        Ok(out)
    }

    fn poset(&mut self) -> Result<PosetDecl, Diagnostic> {
        self.next();
        let name = self.ident("a poset name", "write `poset NAME { a <= b; }`")?;
        self.expect(Tok::LBrace, "open the poset body with `{`")?;
        let mut chains = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let mut chain = vec![self.ident("an element", "write `a <= b;` or `a;`")?];
            while self.eat(&Tok::Le) {
                chain.push(self.ident("an element", "write `a <= b;`")?);
            }
            self.expect(Tok::Semi, "end each relation with `;`")?;
            chains.push(chain);
        }
        Ok(PosetDecl { name, chains })
    }

    fn signature(&mut self, what: &str) -> Result<(Ident, Ident, Ident), Diagnostic> {
        self.next();
        let hint = format!("write `{what} NAME: SOURCE -> TARGET {{ .. }}`");
        let name = self.ident("a name", &hint)?;
        self.expect(Tok::Colon, &hint)?;
        let source = self.ident("a source", &hint)?;
        self.expect(Tok::Arrow, &hint)?;
        let target = self.ident("a target", &hint)?;
        self.expect(Tok::LBrace, &hint)?;
        Ok((name, source, target))
    }

    fn pairs(&mut self) -> Result<Vec<(Ident, Ident)>, Diagnostic> {
        let mut out = Vec::new();
        if self.peek() == &Tok::Semi {
            return Ok(out);
        }
        loop {
            let a = self.ident("a name", "write `x -> y`")?;
            self.expect(Tok::Arrow, "write `x -> y`")?;
            let b = self.ident("a name", "write `x -> y`")?;
            out.push((a, b));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn functor(&mut self) -> Result<FunctorDecl, Diagnostic> {
        let (name, source, target) = self.signature("functor")?;
        let (mut objects, mut morphisms) = (Vec::new(), Vec::new());
        const HINT: &str = "functor bodies contain `objects: a -> b;` and `morphisms: f -> g;` lines";
        while !self.eat(&Tok::RBrace) {
            let section = self.ident("a section label", HINT)?;
            self.expect(Tok::Colon, HINT)?;
            match section.name.as_str() {
                "objects" => objects.extend(self.pairs()?),
                "morphisms" => morphisms.extend(self.pairs()?),
                _ => return Err(Diagnostic::new(section.pos, format!("unknown section `{}`", section.name), HINT)),
            }
            self.expect(Tok::Semi, "end each section with `;`")?;
        }
        Ok(FunctorDecl { name, source, target, objects, morphisms })
    }

    fn site(&mut self) -> Result<SiteDecl, Diagnostic> {
        let saturate = self.next().0 == Tok::Ident("coverage".into());
        self.keyword("on", "write `coverage on CATEGORY { X: [f, g]; }`")?;
        let category = self.ident("a category name", "write `coverage on CATEGORY { .. }`")?;
        self.expect(Tok::LBrace, "open the body with `{`")?;
        let mut families = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let x = self.ident("an object", "write `X: [f, g];`")?;
            self.expect(Tok::Colon, "write `X: [f, g];`")?;
            self.expect(Tok::LBracket, "list the family in brackets, as in `X: [f, g];`")?;
            let fam = self.list(&Tok::RBracket, "a morphism name")?;
            self.expect(Tok::RBracket, "close the family with `]`")?;
            self.expect(Tok::Semi, "end each family with `;`")?;
            families.push((x, fam));
        }
        Ok(SiteDecl { category, saturate, families })
    }

    fn indexed(&mut self) -> Result<IndexedDecl, Diagnostic> {
        self.next();
        let name = self.ident("a name", "write `indexed NAME over CATEGORY { .. }`")?;
        self.keyword("over", "write `indexed NAME over CATEGORY { .. }`")?;
        let base = self.ident("a category name", "write `indexed NAME over CATEGORY { .. }`")?;
        self.expect(Tok::LBrace, "open the body with `{`")?;
        let mut d = IndexedDecl {
            name,
            base,
            fibers: Vec::new(),
            restrictions: Vec::new(),
            compositors: Vec::new(),
            unitors: Vec::new(),
            strict: false,
        };
        const HINT: &str = "indexed bodies contain `fiber X = CAT;`, `restrict f = FUNCTOR;`, `compositor y, z @ U = m;`, `unitor X @ U = m;` and `strict;`";
        while !self.eat(&Tok::RBrace) {
            let kw = self.ident("a statement", HINT)?;
            match kw.name.as_str() {
                "fiber" | "restrict" => {
                    let a = self.ident("a name", HINT)?;
                    self.expect(Tok::Eq, HINT)?;
                    let b = self.ident("a name", HINT)?;
                    if kw.name == "fiber" {
                        d.fibers.push((a, b));
                    } else {
                        d.restrictions.push((a, b));
                    }
                }
                "compositor" => {
                    let y = self.ident("a morphism", HINT)?;
                    self.expect(Tok::Comma, "write `compositor y, z @ U = m;`")?;
                    let z = self.ident("a morphism", HINT)?;
                    self.expect(Tok::At, "write `compositor y, z @ U = m;`")?;
                    let u = self.ident("a fiber object", HINT)?;
                    self.expect(Tok::Eq, "write `compositor y, z @ U = m;`")?;
                    let m = self.ident("a fiber morphism", HINT)?;
                    d.compositors.push((y, z, u, m));
                }
                "unitor" => {
                    let x = self.ident("an object", HINT)?;
                    self.expect(Tok::At, "write `unitor X @ U = m;`")?;
                    let u = self.ident("a fiber object", HINT)?;
                    self.expect(Tok::Eq, "write `unitor X @ U = m;`")?;
                    let m = self.ident("a fiber morphism", HINT)?;
                    d.unitors.push((x, u, m));
                }
                "strict" => d.strict = true,
                _ => return Err(Diagnostic::new(kw.pos, format!("unknown statement `{}`", kw.name), HINT)),
            }
            self.expect(Tok::Semi, "end each statement with `;`")?;
        }
        Ok(d)
    }

    fn presheaf(&mut self) -> Result<PresheafDecl, Diagnostic> {
        self.next();
        let name = self.ident("a name", "write `presheaf NAME over CATEGORY { .. }`")?;
        self.keyword("over", "write `presheaf NAME over CATEGORY { .. }`")?;
        let base = self.ident("a category name", "write `presheaf NAME over CATEGORY { .. }`")?;
        self.expect(Tok::LBrace, "open the body with `{`")?;
        let (mut values, mut actions) = (Vec::new(), Vec::new());
        const HINT: &str = "presheaf bodies contain `X = {x0, x1};` and `f: y0 -> x0, y1 -> x0;`";
        while !self.eat(&Tok::RBrace) {
            let key = self.ident("an object or morphism", HINT)?;
            if self.eat(&Tok::Eq) {
                self.expect(Tok::LBrace, "write the set as `{x0, x1}`")?;
                let elems = self.list(&Tok::RBrace, "an element")?;
                self.expect(Tok::RBrace, "close the set with `}`")?;
                values.push((key, elems));
            } else if self.eat(&Tok::Colon) {
                actions.push((key, self.pairs()?));
            } else {
                return self.error("`=` or `:`", HINT);
            }
            self.expect(Tok::Semi, "end each statement with `;`")?;
        }
        Ok(PresheafDecl { name, base, values, actions })
    }

    fn map(&mut self) -> Result<MapDecl, Diagnostic> {
        let fibration = self.peek_keyword() == Some("fibration");
        let (name, source, target) = self.signature(if fibration { "fibration" } else { "map" })?;
        let (mut components, mut cells) = (Vec::new(), Vec::new());
        const HINT: &str = "bodies contain `component X = FUNCTOR;` and `cell y @ a = m;`";
        while !self.eat(&Tok::RBrace) {
            let kw = self.ident("a statement", HINT)?;
            match kw.name.as_str() {
                "component" => {
                    let x = self.ident("an object", HINT)?;
                    self.expect(Tok::Eq, HINT)?;
                    components.push((x, self.ident("a functor name", HINT)?));
                }
                "cell" => {
                    let y = self.ident("a morphism", HINT)?;
                    self.expect(Tok::At, "write `cell y @ a = m;`")?;
                    let a = self.ident("a fiber object", HINT)?;
                    self.expect(Tok::Eq, "write `cell y @ a = m;`")?;
                    cells.push((y, a, self.ident("a fiber morphism", HINT)?));
                }
                _ => return Err(Diagnostic::new(kw.pos, format!("unknown statement `{}`", kw.name), HINT)),
            }
            self.expect(Tok::Semi, "end each statement with `;`")?;
        }
        Ok(MapDecl { name, fibration, source, target, components, cells })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks() {
        let doc = parse(
            "poset C { a <= b; }\ncoverage on C { b: [a_b]; }\ncategory K = chaotic(p, q);\n\
             presheaf F over C { a = {x0, x1}; b = {y}; a_b: y -> x0; }",
        )
        .unwrap();
        assert_eq!(doc.items.len(), 4);
        let Item::Site(s) = &doc.items[1] else { panic!() };
        assert!(s.saturate);
        assert_eq!(s.families[0].1[0].name, "a_b");
    }

    #[test]
    fn diagnostic_has_position_and_hint() {
        let e = parse("category C {\n  objects: a\n}").unwrap_err();
        assert_eq!(e.pos, Pos { line: 3, col: 1 });
        assert!(e.message.contains("`;`"));
        assert!(!e.hint.is_empty());
    }

    #[test]
    fn relations_are_paths() {
        let doc = parse("category C { objects: a; morphisms: t: a -> a; compose: t . t = id_a; }").unwrap();
        let Item::Category(c) = &doc.items[0] else { panic!() };
        let CategoryBody::Presented { relations, .. } = &c.body else { panic!() };
        assert_eq!(relations[0].lhs.len(), 2);
        assert_eq!(relations[0].rhs[0].name, "id_a");
    }
}
