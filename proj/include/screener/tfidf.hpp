#pragma once

#include "screener/feature_matrix.hpp"
#include "screener/tokenizer.hpp"
#include "screener/vocabulary.hpp"

namespace screener {

// entry(d, t) = tf(d, t) * idf(t), idf(t) = ln((1 + n) / (1 + df(t))) + 1,
// each row L2-normalised. tf is the raw count, or 1 + ln(count) when
// sublinear_tf. Documents without in-vocabulary tokens get an all-zero row and
// are listed in flagged_rows().
FeatureMatrix tfidf(const TokenizedCorpus& docs, const Vocabulary& vocab, bool sublinear_tf = false);

}  // namespace screener
