#include <stdio.h>
#include <string.h>

#include "evidencer.h"

#define CHECK(cond, ...)                        \
    do {                                        \
        if (!(cond)) {                          \
            fprintf(stderr, __VA_ARGS__);       \
            fprintf(stderr, "\n");              \
            return 1;                           \
        }                                       \
    } while (0)

int main(int argc, char **argv) {
    CHECK(argc == 4, "usage: smoke INDEX REDIRECTS CASCADES");
    EvxEngine *engine = NULL;
    EvxStatus s = evx_engine_open(argv[1], argv[2], argv[3], &engine);
    CHECK(s == EVX_STATUS_OK, "open: %d %s", s, evx_last_error());

    EvxCandidates *list = NULL;
    s = evx_retrieve(engine, "gambling", NULL, &list);
    CHECK(s == EVX_STATUS_OK, "retrieve: %d %s", s, evx_last_error());
    size_t n = 0;
    CHECK(evx_candidates_len(list, &n) == EVX_STATUS_OK && n > 0, "no candidates");
    for (size_t i = 0; i < n; i++) {
        EvxCandidate c;
        CHECK(evx_candidates_get(list, i, &c) == EVX_STATUS_OK, "get %zu", i);
        printf("%s#%u\t%s\t%s\n", c.doc_id, c.sent_idx,
               c.evidence_type == EVX_EVIDENCE_TYPE_STUDY ? "study" : "expert", c.query_id);
    }
    EvxCandidate c;
    CHECK(evx_candidates_get(list, n, &c) == EVX_STATUS_OUT_OF_RANGE, "out of range accepted");
    CHECK(strlen(evx_last_error()) > 0, "no error message");
    evx_candidates_free(list);
    evx_engine_free(engine);

    uint8_t a[] = {1, 1, 1, 0, 0, 0}, b[] = {1, 1, 0, 1, 0, 0};
    double k = 0;
    CHECK(evx_cohen_kappa(a, b, 6, &k) == EVX_STATUS_OK, "kappa");
    printf("kappa %.17g\n", k);
    return 0;
}
