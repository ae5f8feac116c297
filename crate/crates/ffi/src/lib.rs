//! C ABI for the crowdgame library.
//!
//! Every fallible function returns a [`CgStatus`]. On failure the message is
//! available from [`cg_last_error`] on the same thread until the next call.
//! Handles returned through out-pointers must be released with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crowdgame::equilibrium::{self, SubgameCase};
use crowdgame::model::{FirstStageProfile, GameParams, Player, ProductivityPair};
use crowdgame::montecarlo::{self, Conditioning, SimConfig, SimReport};
use crowdgame::GameError;

pub const CG_PROFILE_CC: u32 = 0;
pub const CG_PROFILE_CS: u32 = 1;
pub const CG_PROFILE_SC: u32 = 2;
pub const CG_PROFILE_SS: u32 = 3;

pub const CG_REGION_CC_UNIQUE: u32 = 0;
pub const CG_REGION_SS_UNIQUE: u32 = 1;
pub const CG_REGION_BOTH: u32 = 2;

pub const CG_CASE_BOTH_IN_HOUSE: u32 = 0;
pub const CG_CASE_NO_CONTEST: u32 = 1;
pub const CG_CASE_UNILATERAL_REACH: u32 = 2;
pub const CG_CASE_CONTESTED: u32 = 3;

pub const CG_CONDITIONING_ALL: u32 = 0;
pub const CG_CONDITIONING_CONTESTED: u32 = 1;

/// Sentinel for "no forced first-stage profile" in [`cg_simulate`].
pub const CG_PROFILE_NONE: u32 = 0xFFFF_FFFF;

pub const CG_STAT_MEAN_U1: u32 = 0;
pub const CG_STAT_MEAN_U2: u32 = 1;
pub const CG_STAT_ATTACK_RATE: u32 = 2;
pub const CG_STAT_WEAK_WIN_RATE: u32 = 3;
pub const CG_STAT_TOTAL_COST: u32 = 4;
pub const CG_STAT_TOTAL_UTILITY: u32 = 5;
pub const CG_STAT_WINNER_EFFECTIVE_PRODUCTIVITY: u32 = 6;
pub const CG_STAT_CONTESTED_FRACTION: u32 = 7;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    OutOfRange = 2,
    InvalidArgument = 3,
    Unsolvable = 4,
    UnknownPolicy = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Opaque game parameters.
pub struct CgParams {
    inner: GameParams,
}

/// Opaque Monte Carlo report.
pub struct CgSimReport {
    inner: SimReport,
}

/// Ex-ante first-stage payoffs; `xy_u1` is player 1's payoff when player 1
/// plays `x` and player 2 plays `y`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgPayoffTable {
    pub cc_u1: f64,
    pub cc_u2: f64,
    pub cs_u1: f64,
    pub cs_u2: f64,
    pub sc_u1: f64,
    pub sc_u2: f64,
    pub ss_u1: f64,
    pub ss_u2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgSecondStage {
    /// One of the `CG_CASE_*` constants.
    pub subgame_case: u32,
    /// 1 or 2.
    pub strong_player: u32,
    pub lambda_strong: f64,
    pub lambda_weak: f64,
    pub attack_prob_1: f64,
    pub attack_prob_2: f64,
    pub u1: f64,
    pub u2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &GameError) -> CgStatus {
    match err {
        GameError::OutOfRange { .. } => CgStatus::OutOfRange,
        GameError::Unsolvable(_) => CgStatus::Unsolvable,
        GameError::UnknownPolicy { .. } => CgStatus::UnknownPolicy,
        GameError::InconsistentProductivities { .. }
        | GameError::ProductivityTie(_)
        | GameError::InvalidArgument(_) => CgStatus::InvalidArgument,
    }
}

struct Failure(CgStatus, String);

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CgStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CgStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn params_ref<'a>(params: *const CgParams) -> Result<&'a GameParams, Failure> {
    params
        .as_ref()
        .map(|p| &p.inner)
        .ok_or_else(|| null("params"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(CgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn profile_arg(code: u32) -> Result<FirstStageProfile, Failure> {
    FirstStageProfile::ALL
        .get(code as usize)
        .copied()
        .ok_or_else(|| {
            Failure(
                CgStatus::InvalidArgument,
                format!("unknown profile code {code}"),
            )
        })
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_params_new(q: f64, d: f64, out: *mut *mut CgParams) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = GameParams::new(q, d)?;
        out.write(Box::into_raw(Box::new(CgParams { inner })));
        Ok(())
    })
}

/// # Safety
/// `params` must be NULL or a handle from [`cg_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_params_free(params: *mut CgParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_overlap_probability(d: f64, out: *mut f64) -> CgStatus {
    guard(|| write(out, equilibrium::overlap_probability(d)?, "out"))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_lead_probability(d: f64, out: *mut f64) -> CgStatus {
    guard(|| write(out, equilibrium::lead_probability(d)?, "out"))
}

/// Mixed equilibrium of the contested attack subgame at cost `q`.
///
/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_solve_contested(
    q: f64,
    lambda_strong: *mut f64,
    lambda_weak: *mut f64,
) -> CgStatus {
    guard(|| {
        if lambda_strong.is_null() || lambda_weak.is_null() {
            return Err(null("out"));
        }
        let game = equilibrium::contested_payoff_matrix(q)?;
        let s = equilibrium::solve_2x2_mixed(&game)?;
        lambda_strong.write(s.lambda1);
        lambda_weak.write(s.lambda2);
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_ex_ante_payoffs(
    params: *const CgParams,
    out: *mut CgPayoffTable,
) -> CgStatus {
    guard(|| {
        let t = equilibrium::ex_ante_payoffs(params_ref(params)?);
        let table = CgPayoffTable {
            cc_u1: t.cc.u1,
            cc_u2: t.cc.u2,
            cs_u1: t.cs.u1,
            cs_u2: t.cs.u2,
            sc_u1: t.sc.u1,
            sc_u2: t.sc.u2,
            ss_u1: t.ss.u1,
            ss_u2: t.ss.u2,
        };
        write(out, table, "out")
    })
}

/// Writes a bitmask of pure first-stage equilibria: bit `CG_PROFILE_*` is
/// set for each equilibrium profile.
///
/// # Safety
/// `params` must be a live handle and `out_mask` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_pure_equilibria(
    params: *const CgParams,
    out_mask: *mut u32,
) -> CgStatus {
    guard(|| {
        let eqs = equilibrium::pure_first_stage_equilibria(params_ref(params)?);
        let mask = FirstStageProfile::ALL
            .iter()
            .enumerate()
            .filter(|(_, p)| eqs.contains(p))
            .fold(0u32, |m, (i, _)| m | (1 << i));
        write(out_mask, mask, "out_mask")
    })
}

/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_classify_region(params: *const CgParams, out: *mut u32) -> CgStatus {
    guard(|| {
        let code = match equilibrium::classify_region(params_ref(params)?) {
            equilibrium::RegionLabel::CCUnique => CG_REGION_CC_UNIQUE,
            equilibrium::RegionLabel::SSUnique => CG_REGION_SS_UNIQUE,
            equilibrium::RegionLabel::Both => CG_REGION_BOTH,
        };
        write(out, code, "out")
    })
}

/// Second-stage equilibrium after first-stage `profile` with realised
/// productivities `p1`, `p2`. In-house players must have productivity 0.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_second_stage(
    params: *const CgParams,
    profile: u32,
    p1: f64,
    p2: f64,
    out: *mut CgSecondStage,
) -> CgStatus {
    guard(|| {
        let params = params_ref(params)?;
        let profile = profile_arg(profile)?;
        let e =
            equilibrium::second_stage_equilibrium(profile, ProductivityPair::new(p1, p2), params)?;
        let subgame_case = match e.case {
            SubgameCase::BothInHouse => CG_CASE_BOTH_IN_HOUSE,
            SubgameCase::NoContest => CG_CASE_NO_CONTEST,
            SubgameCase::UnilateralReach => CG_CASE_UNILATERAL_REACH,
            SubgameCase::Contested => CG_CASE_CONTESTED,
        };
        let result = CgSecondStage {
            subgame_case,
            strong_player: e.strong.number() as u32,
            lambda_strong: e.strategy.lambda1,
            lambda_weak: e.strategy.lambda2,
            attack_prob_1: e.attack_probability(Player::One),
            attack_prob_2: e.attack_probability(Player::Two),
            u1: e.utility(Player::One),
            u2: e.utility(Player::Two),
        };
        write(out, result, "out")
    })
}

/// Runs a Monte Carlo batch. Policies are looked up by name; `profile` is a
/// `CG_PROFILE_*` code or `CG_PROFILE_NONE`; `partitions` of 0 selects the
/// default.
///
/// # Safety
/// `params` must be a live handle, the policy names NUL-terminated strings,
/// and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_simulate(
    params: *const CgParams,
    trials: u64,
    seed: u64,
    policy1: *const c_char,
    policy2: *const c_char,
    conditioning: u32,
    profile: u32,
    partitions: u32,
    out: *mut *mut CgSimReport,
) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = *params_ref(params)?;
        let p1 = montecarlo::policy_by_name(str_arg(policy1, "policy1")?)?;
        let p2 = montecarlo::policy_by_name(str_arg(policy2, "policy2")?)?;
        let conditioning = match conditioning {
            CG_CONDITIONING_ALL => Conditioning::All,
            CG_CONDITIONING_CONTESTED => Conditioning::ContestedOnly,
            other => {
                return Err(Failure(
                    CgStatus::InvalidArgument,
                    format!("unknown conditioning code {other}"),
                ))
            }
        };
        let mut config =
            SimConfig::new(params, trials, seed, p1, p2).with_conditioning(conditioning);
        if profile != CG_PROFILE_NONE {
            config = config.with_profile(profile_arg(profile)?);
        }
        if partitions != 0 {
            config = config.with_partitions(partitions);
        }
        let inner = montecarlo::run_batch(&config)?;
        out.write(Box::into_raw(Box::new(CgSimReport { inner })));
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle from [`cg_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_sim_report_free(report: *mut CgSimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Reads one statistic (`CG_STAT_*`) from a report.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_sim_report_estimate(
    report: *const CgSimReport,
    stat: u32,
    out: *mut CgEstimate,
) -> CgStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        let e = match stat {
            CG_STAT_MEAN_U1 => r.mean_u1,
            CG_STAT_MEAN_U2 => r.mean_u2,
            CG_STAT_ATTACK_RATE => r.attack_rate,
            CG_STAT_WEAK_WIN_RATE => r.weak_win_rate,
            CG_STAT_TOTAL_COST => r.total_cost,
            CG_STAT_TOTAL_UTILITY => r.total_utility,
            CG_STAT_WINNER_EFFECTIVE_PRODUCTIVITY => r.winner_effective_productivity,
            CG_STAT_CONTESTED_FRACTION => r.contested_fraction,
            other => {
                return Err(Failure(
                    CgStatus::InvalidArgument,
                    format!("unknown statistic code {other}"),
                ))
            }
        };
        write(
            out,
            CgEstimate {
                mean: e.mean,
                std_error: e.std_error,
                n: e.n,
            },
            "out",
        )
    })
}

/// Number of trials that passed the conditioning filter.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_sim_report_trials_counted(
    report: *const CgSimReport,
    out: *mut u64,
) -> CgStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        write(out, r.trials_counted, "out")
    })
}

/// Serialises a report as JSON. Free the string with [`cg_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cg_sim_report_json(
    report: *const CgSimReport,
    out: *mut *mut c_char,
) -> CgStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        let json = serde_json::to_string(r)
            .map_err(|e| Failure(CgStatus::InvalidArgument, e.to_string()))?;
        let c = CString::new(json).expect("JSON has no NUL bytes");
        write(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
