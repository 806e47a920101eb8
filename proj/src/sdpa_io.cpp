#include "piekit/sdpa_io.hpp"

#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>

namespace piekit {

namespace {

void append(std::string& out, const char* fmt, ...) {
    char buf[128];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    out += buf;
}

// matno -> block -> (row, col) -> value, all 1-based with row <= col
using EntryMap = std::map<int, std::map<int, std::map<std::pair<int, int>, double>>>;

void add(EntryMap& em, int mat, int blk, int r, int c, double v) {
    if (r > c) std::swap(r, c);
    if (v != 0.0) em[mat][blk][{r, c}] += v;
}

}  // namespace

std::string to_sdpa_sparse(const SDProblem& prob) {
    prob.validate();
    const int m = prob.num_constraints();
    const int nb = static_cast<int>(prob.block_sizes.size());
    const int nf = prob.num_free;
    const int nblock = nb + (nf > 0 ? 1 : 0);

    // Encoded as the SDPA dual pair: maximize tr(F0 Y) subject to
    // tr(Fi Y) = c_i, so F0 = -C, Fi = A_i, c = b. The reported SDPA
    // objective is then the negated minimum of the source problem.
    std::string out;
    append(out, "%d\n%d\n", m, nblock);
    for (int k = 0; k < nb; ++k) append(out, "%d ", prob.block_sizes[k]);
    if (nf > 0) append(out, "%d", -2 * nf);
    out += "\n";
    for (int i = 0; i < m; ++i) append(out, "%.17g ", prob.b(i));
    out += "\n";

    EntryMap em;
    for (int k = 0; k < nb; ++k)
        for (int r = 0; r < prob.block_sizes[k]; ++r)
            for (int c = r; c < prob.block_sizes[k]; ++c)
                add(em, 0, k + 1, r + 1, c + 1, -prob.C[k](r, c));
    for (const SDProblem::Entry& e : prob.entries)
        add(em, e.constraint + 1, e.block + 1, e.row + 1, e.col + 1, e.value);
    if (nf > 0) {
        for (int j = 0; j < nf; ++j) {
            add(em, 0, nb + 1, j + 1, j + 1, -prob.c_free(j));
            add(em, 0, nb + 1, nf + j + 1, nf + j + 1, prob.c_free(j));
        }
        for (int col = 0; col < prob.G.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(prob.G, col); it; ++it) {
                add(em, static_cast<int>(it.row()) + 1, nb + 1, col + 1, col + 1, it.value());
                add(em, static_cast<int>(it.row()) + 1, nb + 1, nf + col + 1, nf + col + 1,
                    -it.value());
            }
    }
    for (const auto& [mat, blocks] : em)
        for (const auto& [blk, vals] : blocks)
            for (const auto& [rc, v] : vals)
                append(out, "%d %d %d %d %.17g\n", mat, blk, rc.first, rc.second, v);
    return out;
}

void write_sdpa_sparse(const std::string& path, const SDProblem& prob) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    std::string text = to_sdpa_sparse(prob);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

}  // namespace piekit
