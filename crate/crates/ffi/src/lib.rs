//! C interface to the hydra game engine.
//!
//! Every fallible call returns a [`HydraStatus`]; on failure a message is
//! available from [`hydra_last_error`] on the same thread. Strings returned
//! through `char **` out-parameters are owned by the caller and released with
//! [`hydra_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hydra_core::game::{game_height, GameError, GameState, Height};
use hydra_core::moves::MoveConfig;
use hydra_core::textio::{parse_hydra, parse_labels, Document, ParseError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HydraStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    IndexOutOfRange = 4,
    Game = 5,
    Panic = 6,
}

/// A game in progress.
pub struct HydraGame {
    state: GameState,
    config: MoveConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(HydraStatus, String);

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure(HydraStatus::Parse, e.to_string())
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Index { .. } => Failure(HydraStatus::IndexOutOfRange, e.to_string()),
            other => Failure(HydraStatus::Game, other.to_string()),
        }
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> HydraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HydraStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside hydra library".to_string());
            HydraStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(HydraStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(HydraStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn game_ref<'a>(g: *const HydraGame) -> Result<&'a HydraGame, Failure> {
    g.as_ref()
        .ok_or_else(|| Failure(HydraStatus::NullArgument, "game handle is NULL".to_string()))
}

fn null_out(what: &str) -> Failure {
    Failure(HydraStatus::NullArgument, format!("{what} is NULL"))
}

fn give_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null_out("out"));
    }
    let c = CString::new(s).map_err(|e| Failure(HydraStatus::Game, e.to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hydra_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hydra_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and sort-checks `text`, writing its printed normal form to `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_parse(text: *const c_char, out: *mut *mut c_char) -> HydraStatus {
    guard(|| {
        let h = parse_hydra(unsafe { c_str(text, "text") }?)?;
        give_string(h.to_string(), out)
    })
}

/// Starts a game at level 0. `labels` is a comma-separated label list and
/// may be NULL for the empty set.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_new(
    hydra: *const c_char,
    labels: *const c_char,
    out: *mut *mut HydraGame,
) -> HydraStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        let h = parse_hydra(unsafe { c_str(hydra, "hydra") }?)?;
        let lb = if labels.is_null() {
            Default::default()
        } else {
            parse_labels(unsafe { c_str(labels, "labels") }?)?
        };
        let game = HydraGame {
            state: GameState::new(h, lb)?,
            config: MoveConfig::default(),
        };
        unsafe { *out = Box::into_raw(Box::new(game)) };
        Ok(())
    })
}

/// Releases a game. NULL is ignored.
///
/// # Safety
/// `game` must come from [`hydra_game_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_free(game: *mut HydraGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_move_count(game: *const HydraGame, out: *mut usize) -> HydraStatus {
    guard(|| {
        let g = unsafe { game_ref(game) }?;
        if out.is_null() {
            return Err(null_out("out"));
        }
        let n = g.state.moves(g.config)?.len();
        unsafe { *out = n };
        Ok(())
    })
}

/// Plays the move at `index` of the current enumeration.
///
/// # Safety
/// `game` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_apply(game: *mut HydraGame, index: usize) -> HydraStatus {
    guard(|| {
        let g = unsafe { game.as_mut() }.ok_or_else(|| null_out("game handle"))?;
        g.state = g.state.apply_index(index, g.config)?;
        Ok(())
    })
}

/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_level(game: *const HydraGame, out: *mut u64) -> HydraStatus {
    guard(|| {
        let g = unsafe { game_ref(game) }?;
        if out.is_null() {
            return Err(null_out("out"));
        }
        unsafe { *out = g.state.level };
        Ok(())
    })
}

/// Current hydra in the text syntax.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_hydra(game: *const HydraGame, out: *mut *mut c_char) -> HydraStatus {
    guard(|| give_string(unsafe { game_ref(game) }?.state.hydra.to_string(), out))
}

/// Current measure `d_Ω(o(H)#o(lb))`, printed.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_measure(game: *const HydraGame, out: *mut *mut c_char) -> HydraStatus {
    guard(|| {
        let m = unsafe { game_ref(game) }?.state.measure()?;
        give_string(m.to_string(), out)
    })
}

/// Current state as a `game_state` JSON document.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_game_state_json(game: *const HydraGame, out: *mut *mut c_char) -> HydraStatus {
    guard(|| {
        let doc = unsafe { game_ref(game) }?.state.to_document();
        give_string(doc.to_string(), out)
    })
}

/// Longest play from `hydra` with at most `budget` positions searched.
/// `*exact` is set to 1 when the value is exact and 0 for a lower bound.
///
/// # Safety
/// String arguments must be NUL-terminated (`labels` may be NULL); `out`
/// and `exact` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hydra_height(
    hydra: *const c_char,
    labels: *const c_char,
    budget: usize,
    out: *mut u64,
    exact: *mut i32,
) -> HydraStatus {
    guard(|| {
        if out.is_null() || exact.is_null() {
            return Err(null_out("out"));
        }
        let h = parse_hydra(unsafe { c_str(hydra, "hydra") }?)?;
        let lb = if labels.is_null() {
            Default::default()
        } else {
            parse_labels(unsafe { c_str(labels, "labels") }?)?
        };
        let v = game_height(&h, &lb, budget, MoveConfig::default())?;
        unsafe {
            *out = v.value();
            *exact = i32::from(matches!(v, Height::Exact(_)));
        }
        Ok(())
    })
}
