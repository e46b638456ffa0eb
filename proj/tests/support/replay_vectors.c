/* Replays kernel_vectors.tsv against m_runtime.h; prints mismatches and
 * exits 1 if there are any. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "m_runtime.h"

static m_value make(int def, const char *hex)
{
    unsigned long long bits = strtoull(hex, 0, 16);
    return def ? m_bits(bits) : m_undef();
}

static int same(m_value a, m_value b)
{
    if (a.def != b.def) return 0;
    return !a.def || memcmp(&a.val, &b.val, sizeof a.val) == 0;
}

static int apply(const char *op, m_value a, m_value b, m_value *r)
{
#define BIN(name) if (strcmp(op, #name) == 0) { *r = m_##name(a, b); return 1; }
#define UN(name) if (strcmp(op, #name) == 0) { *r = m_##name(a); return 1; }
    BIN(add) BIN(sub) BIN(mul) BIN(div)
    BIN(cmp_le) BIN(cmp_lt) BIN(cmp_gt) BIN(cmp_ge) BIN(cmp_eq) BIN(cmp_ne)
    BIN(and) BIN(or) BIN(min) BIN(max)
    UN(neg) UN(not) UN(round) UN(truncate) UN(abs) UN(pos) UN(pos_or_null) UN(null) UN(present)
#undef BIN
#undef UN
    return 0;
}

int main(int argc, char **argv)
{
    char line[256], op[32], ah[32], bh[32], oh[32];
    int ad, bd, od;
    long count = 0, bad = 0;
    FILE *f = argc > 1 ? fopen(argv[1], "r") : stdin;
    if (!f) return 2;
    while (fgets(line, sizeof line, f)) {
        m_value got;
        if (line[0] == '#') continue;
        if (sscanf(line, "%31s %d %31s %d %31s %d %31s", op, &ad, ah, &bd, bh, &od, oh) != 7) return 2;
        if (!apply(op, make(ad, ah), make(bd, bh), &got)) {
            printf("unknown op %s\n", op);
            return 2;
        }
        ++count;
        if (!same(got, make(od, oh))) {
            ++bad;
            printf("mismatch: %s", line);
        }
    }
    printf("%ld vectors, %ld mismatches\n", count, bad);
    return bad ? 1 : 0;
}
