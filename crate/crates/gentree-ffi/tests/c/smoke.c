#include <stdio.h>
#include <string.h>

#include "gentree.h"

int main(void) {
    uint32_t buf[16];
    size_t written = 0;
    if (gentree_pat("av1423-4123", "-2,+1B,+1B,+1T,+1T,-7", buf, 16, &written) != GENTREE_STATUS_OK) {
        fprintf(stderr, "pat failed: %s\n", gentree_last_error());
        return 1;
    }
    for (size_t i = 0; i < written; i++) {
        printf("%u", buf[i]);
    }
    printf("\n");

    GentreeSampler *s = NULL;
    if (gentree_sampler_new("famB", 3, 1, &s) != GENTREE_STATUS_INFEASIBLE) {
        return 2;
    }
    if (gentree_sampler_new("av132", 6, 1, &s) != GENTREE_STATUS_OK) {
        return 3;
    }
    if (gentree_sampler_next(s, buf, 16, &written) != GENTREE_STATUS_OK || written != 6) {
        return 4;
    }
    gentree_sampler_free(s);

    uint32_t pi[2] = {2, 1};
    GentreePatternStats *st = NULL;
    if (gentree_pattern_stats_new("av123", pi, 2, 30, &st) != GENTREE_STATUS_OK) {
        return 5;
    }
    GentreeInterval g;
    gentree_pattern_stats_get(st, GENTREE_CONSTANT_GAMMA2, &g);
    printf("%.6f\n", (g.lo + g.hi) / 2.0);
    char *json = gentree_pattern_stats_to_json(st);
    if (json == NULL || strstr(json, "\"gamma2\"") == NULL) {
        return 6;
    }
    gentree_string_free(json);
    gentree_pattern_stats_free(st);
    return 0;
}
