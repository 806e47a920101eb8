#include "piekit/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace piekit {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const json& data = j.at("data");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = data.at(i).at(c).get<double>();
    return m;
}

json poly_to_json(const PolyMatrix& p) {
    json terms = json::array();
    for (const auto& [key, mat] : p.coeffs())
        terms.push_back(json{{"i", key.first}, {"j", key.second}, {"coeff", matrix_to_json(mat)}});
    return json{{"rows", p.rows()},
                {"cols", p.cols()},
                {"domain", {p.domain().a, p.domain().b}},
                {"terms", std::move(terms)}};
}

PolyMatrix poly_from_json(const json& j) {
    Domain dom(j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>());
    PolyMatrix p(j.at("rows").get<int>(), j.at("cols").get<int>(), VarSet::None, dom);
    for (const json& t : j.at("terms"))
        p.add_coeff(t.at("i").get<int>(), t.at("j").get<int>(), matrix_from_json(t.at("coeff")));
    return p;
}

json op_to_json(const PIOperator& op) {
    return json{{"domain", {op.domain().a, op.domain().b}}, {"P", matrix_to_json(op.P())},
                {"Q1", poly_to_json(op.Q1())},             {"Q2", poly_to_json(op.Q2())},
                {"R0", poly_to_json(op.R0())},             {"R1", poly_to_json(op.R1())},
                {"R2", poly_to_json(op.R2())}};
}

PIOperator op_from_json(const json& j) {
    Domain dom(j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>());
    return PIOperator(matrix_from_json(j.at("P")), poly_from_json(j.at("Q1")),
                      poly_from_json(j.at("Q2")), poly_from_json(j.at("R0")),
                      poly_from_json(j.at("R1")), poly_from_json(j.at("R2")), dom);
}

json sys_to_json(const PIESystem& sys) {
    return json{{"T", op_to_json(sys.T)},   {"A", op_to_json(sys.A)},
                {"B1", op_to_json(sys.B1)}, {"C1", op_to_json(sys.C1)},
                {"C2", op_to_json(sys.C2)}, {"D21", matrix_to_json(sys.D21)}};
}

PIESystem sys_from_json(const json& j) {
    PIESystem sys;
    sys.T = op_from_json(j.at("T"));
    sys.A = op_from_json(j.at("A"));
    sys.B1 = op_from_json(j.at("B1"));
    sys.C1 = op_from_json(j.at("C1"));
    sys.C2 = op_from_json(j.at("C2"));
    sys.D21 = matrix_from_json(j.at("D21"));
    sys.validate();
    return sys;
}

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("serialize: malformed JSON");
    return j;
}

}  // namespace

std::string to_json_string(const PolyMatrix& p) { return poly_to_json(p).dump(2); }
std::string to_json_string(const PIOperator& op) { return op_to_json(op).dump(2); }
std::string to_json_string(const PIESystem& sys) { return sys_to_json(sys).dump(2); }

std::string to_json_string(const ObserverGain& g) {
    return json{{"L1", matrix_to_json(g.L1)}, {"L2", poly_to_json(g.L2)}}.dump(2);
}

PolyMatrix polymatrix_from_json(const std::string& text) { return poly_from_json(parse(text)); }
PIOperator pioperator_from_json(const std::string& text) { return op_from_json(parse(text)); }
PIESystem piesystem_from_json(const std::string& text) { return sys_from_json(parse(text)); }

ObserverGain observergain_from_json(const std::string& text) {
    json j = parse(text);
    return ObserverGain{matrix_from_json(j.at("L1")), poly_from_json(j.at("L2"))};
}

void save_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace piekit
