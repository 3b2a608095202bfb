#include "fsfm/rules.hpp"

namespace fsfm {

const std::string_view kDefaultDangerousRules = R"RULES(# Dangerous-content markers. A match sets the security score to -10 and the
# record is purged at the end of the ingestion batch.
#
# Category markers, one per safety-taxonomy category.
[unsafe:hate]
[unsafe:sexual]
[unsafe:violence]
[unsafe:suicide_self_harm]
[unsafe:threat]
[unsafe:sexual_minor]
[unsafe:guns_illegal_weapons]
[unsafe:controlled_substances]
[unsafe:criminal_planning]
[unsafe:pii_privacy]
[unsafe:harassment]
[unsafe:profanity]
[unsafe:other]
# Explicit harmful requests.
re:\b(make|build|assemble)\s+(a\s+)?(pipe\s+)?(bomb|explosive)s?\b
re:\bkill\s+(yourself|myself|himself|herself|them)\b
re:\bhow\s+to\s+(poison|strangle)\b
)RULES";

const std::string_view kDefaultSensitiveRules = R"RULES(# Personally identifiable information. A match sets the security score to -2.
#
# Phone numbers.
re:(^|[^0-9])1[3-9][0-9]{9}([^0-9]|$)
re:\b[0-9]{3}[-. ][0-9]{3,4}[-. ][0-9]{4}\b
re:\+[0-9]{1,3}[ -]?[0-9]{6,14}\b
# National identity and social security numbers.
re:(^|[^0-9])[0-9]{17}[0-9x]([^0-9]|$)
re:\b[0-9]{3}-[0-9]{2}-[0-9]{4}\b
# Card and bank account numbers.
re:\b([0-9][ -]?){15,18}[0-9]\b
account number
card number
cvv
银行卡
# Email addresses.
re:[a-z0-9._%+-]+@[a-z0-9.-]+\.[a-z]{2,}
# Postal addresses.
home address
address:
住址
re:\b[0-9]+\s+[a-z]+\s+(street|st|road|rd|avenue|ave|lane|ln|boulevard|blvd)\b
)RULES";

const std::string_view kDefaultRefusalRules = R"RULES(# Generic responses that carry no information. A match scores content quality 0.
cannot provide
can't provide
unable to provide
unable to answer
not able to provide
i don't know
i do not know
no information available
无法提供
无法回答
不知道
)RULES";

}  // namespace fsfm
