//! Agent-side observation parsing.
//!
//! Every engine emits an exact, stable observation grammar; this module is
//! the reading side of it. Both the scripted policies and the map extractor
//! work from these parses — never from hidden engine state — so everything
//! an agent "knows" is traceable to observation text.

use crate::types::Observation;

/// Parsed view of a "you arrive at / you are at" observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationView {
    pub location: String,
    /// Container reported closed.
    pub closed: bool,
    /// Container reported open (contents shown are exhaustive).
    pub open: bool,
    /// Objects seen in/on the location.
    pub contents: Vec<String>,
    /// Whether contents were actually shown ("you see ..." present).
    pub contents_shown: bool,
    /// Craft world: materials gatherable here.
    pub gatherables: Vec<String>,
}

fn split_listing(listing: &str) -> Vec<String> {
    let trimmed = listing.trim_end_matches('.');
    if trimmed == "nothing" {
        return Vec::new();
    }
    trimmed
        .split(", ")
        .map(|part| {
            let p = part.trim();
            let p = p.strip_prefix("and ").unwrap_or(p);
            let p = p.strip_prefix("a ").unwrap_or(p);
            p.trim().to_string()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Receptacle/location names from a room or camp listing.
pub fn parse_room_listing(text: &str) -> Vec<String> {
    let marker = if let Some(idx) = text.find("you see ") {
        &text[idx + "you see ".len()..]
    } else if let Some(idx) = text.find("Nearby you see: ") {
        &text[idx + "Nearby you see: ".len()..]
    } else {
        return Vec::new();
    };
    let end = marker.find(". ").unwrap_or(marker.len());
    split_listing(&marker[..end])
}

/// Crafting commands listed in the craft reset observation.
pub fn parse_craft_commands(text: &str) -> Vec<String> {
    let Some(idx) = text.find("Crafting commands: ") else {
        return Vec::new();
    };
    let rest = &text[idx + "Crafting commands: ".len()..];
    let end = rest.find(". ").unwrap_or_else(|| rest.trim_end().trim_end_matches('.').len());
    rest[..end]
        .split("; ")
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Parse an arrival/look observation into a [`LocationView`].
pub fn parse_location_view(text: &str) -> Option<LocationView> {
    let location = if let Some(rest) = text.strip_prefix("You arrive at the ") {
        rest.split('.').next()?.to_string()
    } else if let Some(rest) = text.strip_prefix("You are at the ") {
        rest.split('.').next()?.to_string()
    } else {
        return None;
    };
    let closed = text.contains(" is closed.");
    let open = text.contains(" is open.");
    let mut contents = Vec::new();
    let mut contents_shown = false;
    if let Some(idx) = text.find("you see ") {
        contents_shown = true;
        contents = split_listing(&text[idx + "you see ".len()..]);
    }
    let mut gatherables = Vec::new();
    if let Some(idx) = text.find("Available to gather: ") {
        let rest = &text[idx + "Available to gather: ".len()..];
        gatherables = rest
            .trim_end()
            .trim_end_matches('.')
            .split(", ")
            .map(str::to_string)
            .collect();
    }
    Some(LocationView {
        location,
        closed,
        open,
        contents,
        contents_shown,
        gatherables,
    })
}

/// Parse "You open the X. In the X, you see ..." into (container, contents).
pub fn parse_open(text: &str) -> Option<(String, Vec<String>)> {
    let rest = text.strip_prefix("You open the ")?;
    let container = rest.split('.').next()?.to_string();
    let contents = text
        .find("you see ")
        .map(|idx| split_listing(&text[idx + "you see ".len()..]))
        .unwrap_or_default();
    Some((container, contents))
}

/// Parse "You pick up the O from the R." into (object, receptacle).
pub fn parse_pickup(text: &str) -> Option<(String, String)> {
    let rest = text.strip_prefix("You pick up the ")?;
    let (obj, rest) = rest.split_once(" from the ")?;
    Some((obj.to_string(), rest.trim_end_matches('.').to_string()))
}

/// Parse "You move the O to the R." into (object, receptacle).
pub fn parse_move(text: &str) -> Option<(String, String)> {
    let rest = text.strip_prefix("You move the ")?;
    let (obj, rest) = rest.split_once(" to the ")?;
    Some((obj.to_string(), rest.trim_end_matches('.').to_string()))
}

/// Parse "The X can be used to Y." into (entity, effect).
pub fn parse_device_effect(text: &str) -> Option<(String, String)> {
    let rest = text.strip_prefix("The ")?;
    let (entity, effect) = rest.split_once(" can be used to ")?;
    Some((entity.to_string(), effect.trim_end_matches('.').to_string()))
}

/// Parse "You heat the O using the R." style observations into
/// (verb, object, device).
pub fn parse_state_change(text: &str) -> Option<(String, String, String)> {
    for verb in ["heat", "cool", "clean"] {
        if let Some(rest) = text.strip_prefix(&format!("You {verb} the ")) {
            if let Some((obj, device)) = rest.split_once(" using the ") {
                return Some((
                    verb.to_string(),
                    obj.to_string(),
                    device.trim_end_matches('.').to_string(),
                ));
            }
        }
    }
    None
}

/// Parse "You gather 1 M. You now have N M." / "You take 1 M from the chest."
pub fn parse_acquired(text: &str) -> Option<String> {
    if let Some(rest) = text.strip_prefix("You gather 1 ") {
        return Some(rest.split('.').next()?.to_string());
    }
    if let Some(rest) = text.strip_prefix("You take 1 ") {
        return Some(rest.split(" from the ").next()?.to_string());
    }
    None
}

/// A parsed grid frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFrame {
    pub level: u32,
    pub counter: u32,
    pub status: String,
    pub cells: Vec<Vec<u8>>,
    pub player: Option<(usize, usize)>,
    pub target: Option<(usize, usize)>,
    /// (color, position) for every hazard-colored cell.
    pub hazards: Vec<(u8, (usize, usize))>,
}

/// Parse the textual grid frame.
pub fn parse_grid_frame(text: &str) -> Option<GridFrame> {
    let mut lines = text.lines();
    let level = lines.next()?.strip_prefix("level ")?.parse().ok()?;
    let counter = lines.next()?.strip_prefix("counter ")?.parse().ok()?;
    let status = lines.next()?.strip_prefix("status ")?.to_string();
    let mut cells = Vec::new();
    let mut player = None;
    let mut target = None;
    let mut hazards = Vec::new();
    for (r, line) in lines.enumerate() {
        let mut row = Vec::with_capacity(line.len());
        for (c, ch) in line.chars().enumerate() {
            let color = ch.to_digit(16)? as u8;
            match color {
                9 => player = Some((r, c)),
                14 => target = Some((r, c)),
                8 | 12 => hazards.push((color, (r, c))),
                _ => {}
            }
            row.push(color);
        }
        cells.push(row);
    }
    Some(GridFrame {
        level,
        counter,
        status,
        cells,
        player,
        target,
        hazards,
    })
}

/// Last location the agent is at according to a history of observations.
pub fn current_location(observations: &[&Observation]) -> Option<String> {
    for obs in observations.iter().rev() {
        if let Some(view) = parse_location_view(&obs.text) {
            return Some(view.location);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_listing_roundtrip() {
        let text = "You are in the middle of the room. Looking around you, you see a cabinet 1, a countertop 1, and a shelf 1.";
        assert_eq!(
            parse_room_listing(text),
            vec!["cabinet 1", "countertop 1", "shelf 1"]
        );
    }

    #[test]
    fn arrival_with_contents() {
        let view = parse_location_view(
            "You arrive at the countertop 1. On the countertop 1, you see a cup 2, and a plate 1.",
        )
        .unwrap();
        assert_eq!(view.location, "countertop 1");
        assert!(view.contents_shown);
        assert_eq!(view.contents, vec!["cup 2", "plate 1"]);
        assert!(!view.closed);
    }

    #[test]
    fn arrival_at_closed_container() {
        let view =
            parse_location_view("You arrive at the fridge 1. The fridge 1 is closed.").unwrap();
        assert!(view.closed);
        assert!(!view.contents_shown);
    }

    #[test]
    fn open_with_nothing() {
        let (recep, contents) =
            parse_open("You open the drawer 1. In the drawer 1, you see nothing.").unwrap();
        assert_eq!(recep, "drawer 1");
        assert!(contents.is_empty());
    }

    #[test]
    fn craft_commands() {
        let text = "You are at the camp. Nearby you see: a crafting table, a forest. Crafting commands: craft 4 oak planks using 1 oak log; craft 1 ladder using 3 oak planks.";
        assert_eq!(
            parse_craft_commands(text),
            vec![
                "craft 4 oak planks using 1 oak log",
                "craft 1 ladder using 3 oak planks"
            ]
        );
    }

    #[test]
    fn grid_frame_positions() {
        let text = "level 1\ncounter 60\nstatus start\n555\n59e\n555";
        let frame = parse_grid_frame(text).unwrap();
        assert_eq!(frame.player, Some((1, 1)));
        assert_eq!(frame.target, Some((1, 2)));
        assert_eq!(frame.counter, 60);
        assert_eq!(frame.cells[0], vec![5, 5, 5]);
    }
}
