#include "renyikey/serialize.hpp"

#include <json.hpp>

namespace renyikey {

using nlohmann::json;

namespace {

json matrix_to_json(const CMatrix& m) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) entries.push_back({m(i, j).real(), m(i, j).imag()});
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(entries)}};
}

CMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorKind::InvalidArgument, "protocol json: matrix data length does not match its shape");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
      const json& e = data[static_cast<std::size_t>(i * cols + j2)];
      m(i, j2) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

}  // namespace

std::string protocol_to_json(const ProtocolInstance& inst, int indent) {
  json kraus = json::array();
  for (const auto& k : inst.gmap.kraus()) kraus.push_back(matrix_to_json(k));
  json eq = json::array();
  for (const auto& e : inst.equality_observables) {
    eq.push_back({{"observable", matrix_to_json(e.observable)}, {"value", e.value}});
  }
  json pe = json::array();
  for (const auto& g : inst.pe_observables) pe.push_back(matrix_to_json(g));
  std::vector<double> freq(inst.ideal_frequencies.data(),
                           inst.ideal_frequencies.data() + inst.ideal_frequencies.size());

  json doc = {
      {"name", inst.name},
      {"depolarization", inst.depolarization},
      {"loss", inst.loss},
      {"dims", {{"R", inst.dims.key}, {"A", inst.dims.alice}, {"B", inst.dims.bob}, {"S", inst.dims.announce}}},
      {"rho_ideal", matrix_to_json(inst.rho_ideal.matrix())},
      {"alice_marginal", matrix_to_json(inst.alice_marginal)},
      {"gmap", {{"in_dim", inst.gmap.in_dim()}, {"out_dim", inst.gmap.out_dim()}, {"kraus", std::move(kraus)}}},
      {"zmap", {{"basis", matrix_to_json(inst.zmap.basis())}, {"rest_dim", inst.zmap.rest_dim()}}},
      {"equality_observables", std::move(eq)},
      {"pe_observables", std::move(pe)},
      {"pe_labels", inst.pe_labels},
      {"ideal_frequencies", freq},
      {"hzy", inst.hzy},
      {"sift_probability", inst.sift_probability},
  };
  return doc.dump(indent);
}

ProtocolInstance protocol_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("protocol json: ") + e.what());
  }
  try {
    RegisterDims dims{doc.at("dims").at("R").get<int>(), doc.at("dims").at("A").get<int>(),
                      doc.at("dims").at("B").get<int>(), doc.at("dims").at("S").get<int>()};
    std::vector<CMatrix> kraus;
    for (const auto& k : doc.at("gmap").at("kraus")) kraus.push_back(matrix_from_json(k));
    std::vector<EqualityObservable> eq;
    for (const auto& e : doc.at("equality_observables")) {
      eq.push_back({matrix_from_json(e.at("observable")), e.at("value").get<double>()});
    }
    std::vector<CMatrix> pe;
    for (const auto& g : doc.at("pe_observables")) pe.push_back(matrix_from_json(g));
    const auto freq = doc.at("ideal_frequencies").get<std::vector<double>>();

    ProtocolInstance inst{
        .name = doc.at("name").get<std::string>(),
        .depolarization = doc.at("depolarization").get<double>(),
        .loss = doc.at("loss").get<double>(),
        .dims = dims,
        .rho_ideal = DensityOperator(matrix_from_json(doc.at("rho_ideal"))),
        .alice_marginal = matrix_from_json(doc.at("alice_marginal")),
        .gmap = CpMap(std::move(kraus), doc.at("gmap").at("in_dim").get<int>(), doc.at("gmap").at("out_dim").get<int>()),
        .zmap = PinchingMap(matrix_from_json(doc.at("zmap").at("basis")), doc.at("zmap").at("rest_dim").get<int>()),
        .equality_observables = std::move(eq),
        .pe_observables = std::move(pe),
        .pe_labels = doc.at("pe_labels").get<std::vector<std::string>>(),
        .ideal_frequencies = Eigen::Map<const RVector>(freq.data(), static_cast<Eigen::Index>(freq.size())),
        .hzy = doc.at("hzy").get<double>(),
        .sift_probability = doc.at("sift_probability").get<double>(),
    };
    const RVector check = expected_frequency(inst.rho_ideal.matrix(), inst.pe_observables);
    if (check.size() != inst.ideal_frequencies.size() ||
        (check - inst.ideal_frequencies).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorKind::InvalidArgument, "protocol json: ideal frequencies disagree with rho_ideal");
    }
    return inst;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("protocol json: ") + e.what());
  }
}

}  // namespace renyikey
