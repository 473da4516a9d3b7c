use super::{Action, Cell, GridWorld, WorldError};
use crate::automata::{stutter_collapse, Word};

/// A start cell and the (action, resulting cell) pairs the expert produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demonstration {
    pub start: Cell,
    pub steps: Vec<(Action, Cell)>,
}

impl Demonstration {
    /// Checks bounds and that every step is an outcome of its action.
    pub fn new(world: &GridWorld, start: Cell, steps: Vec<(Action, Cell)>) -> Result<Self, WorldError> {
        let d = Self { start, steps };
        d.validate(world)?;
        Ok(d)
    }

    /// Demonstration in which every action had its intended effect.
    pub fn from_actions(world: &GridWorld, start: Cell, actions: &[Action]) -> Result<Self, WorldError> {
        world.check(start)?;
        let mut at = start;
        let steps = actions
            .iter()
            .map(|&a| {
                at = world.intended(at, a);
                (a, at)
            })
            .collect();
        Self::new(world, start, steps)
    }

    pub fn validate(&self, world: &GridWorld) -> Result<(), WorldError> {
        if self.steps.is_empty() {
            return Err(WorldError::EmptyDemo);
        }
        world.check(self.start)?;
        let mut at = self.start;
        for (i, &(a, next)) in self.steps.iter().enumerate() {
            world.check(next)?;
            if !world.is_possible(at, a, next) {
                return Err(WorldError::ImpossibleStep {
                    step: i + 1,
                    action: a,
                    x: next.x,
                    y: next.y,
                });
            }
            at = next;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Start cell followed by every visited cell.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|&(_, c)| c))
    }
}

/// Colour word of a demonstration: tile colours of the visited cells
/// (start included), uncoloured cells dropped, repeats collapsed.
pub fn featurize(world: &GridWorld, demo: &Demonstration) -> Result<Word, WorldError> {
    featurize_cells(world, demo.cells())
}

/// [`featurize`] for an arbitrary cell sequence.
pub fn featurize_cells(world: &GridWorld, cells: impl IntoIterator<Item = Cell>) -> Result<Word, WorldError> {
    let mut raw = Vec::new();
    for c in cells {
        world.check(c)?;
        if let Some(col) = world.color(c) {
            raw.push(col.symbol());
        }
    }
    Ok(stutter_collapse(&raw))
}

fn parse_cell(text: &str, line: usize) -> Result<Cell, WorldError> {
    let bad = || WorldError::Parse {
        line,
        message: format!("expected a cell \"x,y\", found {text:?}"),
    };
    let (x, y) = text.split_once(',').ok_or_else(bad)?;
    Ok(Cell::new(
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

/// Parses a demonstration file: the start cell `x,y` on the first line, then
/// one action per line, optionally followed by the observed cell. Steps
/// without a cell are assumed to have moved as intended.
pub fn load_demo(text: &str, world: &GridWorld) -> Result<Demonstration, WorldError> {
    let mut start = None;
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(from) = start else {
            let c = parse_cell(line, i + 1)?;
            world.check(c)?;
            start = Some(c);
            continue;
        };
        let mut parts = line.splitn(2, char::is_whitespace);
        let name = parts.next().unwrap_or("");
        let action = Action::parse(name).ok_or_else(|| WorldError::Parse {
            line: i + 1,
            message: format!("unknown action {name:?}"),
        })?;
        let prev = steps.last().map_or(from, |&(_, c)| c);
        let next = match parts.next().map(str::trim).filter(|s| !s.is_empty()) {
            Some(cell) => parse_cell(cell, i + 1)?,
            None => world.intended(prev, action),
        };
        steps.push((action, next));
    }
    let start = start.ok_or(WorldError::EmptyDemo)?;
    Demonstration::new(world, start, steps)
}

/// Inverse of [`load_demo`]; cells are written only for slip steps.
pub fn write_demo(world: &GridWorld, demo: &Demonstration) -> String {
    let mut out = format!("{}\n", demo.start);
    let mut at = demo.start;
    for &(a, c) in &demo.steps {
        if world.intended(at, a) == c {
            out.push_str(&format!("{a}\n"));
        } else {
            out.push_str(&format!("{a} {c}\n"));
        }
        at = c;
    }
    out
}
