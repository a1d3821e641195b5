//! Words of the generalized hamburger-cheeseburger model: reduction and
//! identification, seeded sampling, forward walks, backward renewal
//! estimators, the word/map bijection and exact small-n enumeration.

pub mod bijection;
pub mod oracle;
pub mod reduce;
pub mod renewal;
pub mod sampler;
pub mod stats;
pub mod symbol;
pub mod walk;

pub use bijection::{
    activity_counts, map_to_word, partition_function, partition_polynomial, tutte_polynomial,
    word_to_decorated_map, CombinatorialMap, DecoratedMap,
};
pub use reduce::{
    concat_reduced, counts, identify, match_map, psi, r_index, reduce, s_index, substitute_ch,
    substitute_hc, Counts, MatchMap, ReducedWord, Reducer,
};
pub use sampler::{params_from_yz, yz_from_params, ActivityParams, ParamVector, SeededStream};
pub use symbol::{dagger, format_word, parse_word, Kind, Symbol, Word};
