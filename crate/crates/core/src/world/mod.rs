//! Coloured-tile gridworld with downward wind, demonstrations and the
//! colour-word featurization the task automata read.

mod demo;
pub mod fixtures;
mod tasks;

use std::fmt;

pub use demo::{featurize, featurize_cells, load_demo, write_demo, Demonstration};
pub use tasks::{
    color_alphabet, eventually_yellow_dfa, ground_truth_dfa, rule3_relevant, rules12_dfa, scripted_task_oracle,
};

use crate::automata::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("map rows have different widths (row {row} has {found}, expected {expected})")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("cell ({x},{y}) is outside the {width}x{height} grid")]
    OutOfBounds { x: i64, y: i64, width: usize, height: usize },
    #[error("step {step}: ({x},{y}) is not a possible outcome of {action} from the previous cell")]
    ImpossibleStep { step: usize, action: Action, x: usize, y: usize },
    #[error("a demonstration needs at least one step")]
    EmptyDemo,
    #[error("invalid world: {0}")]
    Invalid(String),
}

/// Tile colours; the index of each coloured variant is its symbol in
/// [`color_alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Yellow,
    Blue,
    Green,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Yellow, Color::Blue, Color::Green];

    pub fn symbol(self) -> Symbol {
        Symbol(self as u16)
    }

    pub fn from_symbol(s: Symbol) -> Option<Self> {
        Self::ALL.get(s.index()).copied()
    }

    pub fn map_char(self) -> char {
        match self {
            Color::Red => 'r',
            Color::Yellow => 'y',
            Color::Blue => 'b',
            Color::Green => 'g',
        }
    }

    pub fn from_map_char(c: char) -> Option<Option<Self>> {
        match c {
            'r' => Some(Some(Color::Red)),
            'y' => Some(Some(Color::Yellow)),
            'b' => Some(Some(Color::Blue)),
            'g' => Some(Some(Color::Green)),
            '.' => Some(None),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s.to_ascii_lowercase())
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid position; `y` grows downwards, the direction the wind blows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

pub const DEFAULT_SLIP: f64 = 1.0 / 32.0;

/// Rectangular grid of optionally coloured tiles. With probability
/// `slip_probability` any action moves the agent down instead; moves off
/// the grid leave it in place.
#[derive(Clone, Debug, PartialEq)]
pub struct GridWorld {
    width: usize,
    height: usize,
    tiles: Vec<Option<Color>>,
    slip_probability: f64,
}

impl GridWorld {
    pub fn new(width: usize, height: usize, tiles: Vec<Option<Color>>, slip_probability: f64) -> Result<Self, WorldError> {
        if width == 0 || height == 0 {
            return Err(WorldError::Invalid("grid must be at least 1x1".into()));
        }
        if tiles.len() != width * height {
            return Err(WorldError::Invalid(format!(
                "{} tiles for a {width}x{height} grid",
                tiles.len()
            )));
        }
        if !(0.0..1.0).contains(&slip_probability) {
            return Err(WorldError::Invalid(format!("slip probability {slip_probability} not in [0, 1)")));
        }
        Ok(Self {
            width,
            height,
            tiles,
            slip_probability,
        })
    }

    pub fn uniform(width: usize, height: usize, slip_probability: f64) -> Result<Self, WorldError> {
        Self::new(width, height, vec![None; width * height], slip_probability)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn slip_probability(&self) -> f64 {
        self.slip_probability
    }

    pub fn with_slip(mut self, slip_probability: f64) -> Result<Self, WorldError> {
        if !(0.0..1.0).contains(&slip_probability) {
            return Err(WorldError::Invalid(format!("slip probability {slip_probability} not in [0, 1)")));
        }
        self.slip_probability = slip_probability;
        Ok(self)
    }

    pub fn cell_index(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells()).map(|i| self.cell_at(i))
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn check(&self, c: Cell) -> Result<(), WorldError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(self.out_of_bounds(c.x as i64, c.y as i64))
        }
    }

    fn out_of_bounds(&self, x: i64, y: i64) -> WorldError {
        WorldError::OutOfBounds {
            x,
            y,
            width: self.width,
            height: self.height,
        }
    }

    pub fn color(&self, c: Cell) -> Option<Color> {
        self.tiles[self.cell_index(c)]
    }

    pub fn set_color(&mut self, c: Cell, color: Option<Color>) {
        let i = self.cell_index(c);
        self.tiles[i] = color;
    }

    /// Deterministic result of `action`, clamped to the grid.
    pub fn intended(&self, c: Cell, action: Action) -> Cell {
        let (dx, dy) = action.delta();
        let x = c.x as i64 + dx;
        let y = c.y as i64 + dy;
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            c
        } else {
            Cell::new(x as usize, y as usize)
        }
    }

    /// Outcomes of `action` at `c` with their probabilities; coinciding
    /// outcomes are merged, so there are one or two entries summing to 1.
    pub fn step_distribution(&self, c: Cell, action: Action) -> Vec<(Cell, f64)> {
        let main = self.intended(c, action);
        let slip = self.intended(c, Action::Down);
        if main == slip || self.slip_probability == 0.0 {
            vec![(main, 1.0)]
        } else {
            vec![(main, 1.0 - self.slip_probability), (slip, self.slip_probability)]
        }
    }

    pub fn is_possible(&self, from: Cell, action: Action, to: Cell) -> bool {
        self.step_distribution(from, action).iter().any(|&(c, _)| c == to)
    }
}

/// Parses an ASCII map: one row per line, `r y b g .` per cell. Blank lines
/// and lines starting with `#` are ignored.
pub fn load_world(text: &str) -> Result<GridWorld, WorldError> {
    let mut tiles = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<Option<Color>> = line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                Color::from_map_char(c).ok_or_else(|| WorldError::Parse {
                    line: i + 1,
                    message: format!("unknown tile '{c}'"),
                })
            })
            .collect::<Result<_, _>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(WorldError::Ragged {
                    row: height,
                    found: row.len(),
                    expected: w,
                })
            }
            _ => {}
        }
        tiles.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| WorldError::Invalid("map has no rows".into()))?;
    GridWorld::new(width, height, tiles, DEFAULT_SLIP)
}

pub fn write_world(world: &GridWorld) -> String {
    let mut out = String::new();
    for y in 0..world.height {
        for x in 0..world.width {
            out.push(world.color(Cell::new(x, y)).map_or('.', Color::map_char));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_map() {
        let w = load_world("y.\n.b").unwrap();
        assert_eq!((w.width(), w.height()), (2, 2));
        assert_eq!(w.color(Cell::new(0, 0)), Some(Color::Yellow));
        assert_eq!(w.color(Cell::new(1, 1)), Some(Color::Blue));
        assert_eq!(w.color(Cell::new(1, 0)), None);
        assert_eq!(write_world(&w), "y.\n.b\n");
    }

    #[test]
    fn map_errors() {
        assert!(matches!(load_world("y.\n.b."), Err(WorldError::Ragged { row: 1, .. })));
        assert!(matches!(load_world("yx"), Err(WorldError::Parse { line: 1, .. })));
        assert!(load_world("").is_err());
    }

    #[test]
    fn slip_dynamics() {
        let w = GridWorld::uniform(3, 3, DEFAULT_SLIP).unwrap();
        let mid = Cell::new(1, 1);
        assert_eq!(w.step_distribution(mid, Action::Down), vec![(Cell::new(1, 2), 1.0)]);
        assert_eq!(
            w.step_distribution(mid, Action::Right),
            vec![(Cell::new(2, 1), 31.0 / 32.0), (Cell::new(1, 2), 1.0 / 32.0)]
        );
        assert_eq!(w.step_distribution(Cell::new(1, 2), Action::Down), vec![(Cell::new(1, 2), 1.0)]);
        // bottom row: a slip stays put, merged with nothing else
        assert_eq!(
            w.step_distribution(Cell::new(1, 2), Action::Up),
            vec![(Cell::new(1, 1), 31.0 / 32.0), (Cell::new(1, 2), 1.0 / 32.0)]
        );
        // top-left corner, moving left is blocked
        assert_eq!(
            w.step_distribution(Cell::new(0, 0), Action::Left),
            vec![(Cell::new(0, 0), 31.0 / 32.0), (Cell::new(0, 1), 1.0 / 32.0)]
        );
    }

    #[test]
    fn slip_bounds() {
        assert!(GridWorld::uniform(2, 2, 1.0).is_err());
        assert!(GridWorld::uniform(2, 2, -0.1).is_err());
        assert!(GridWorld::uniform(0, 2, 0.0).is_err());
    }
}
