#include "rons/parameter_state.hpp"

#include <utility>

#include "rons/errors.hpp"

namespace rons {

Layout::Layout(std::vector<Component> components)
    : components_(std::move(components)) {
  offsets_.reserve(components_.size());
  for (const auto& c : components_) {
    if (c.count == 0) {
      throw ValidationError("layout component '" + c.name + "' is empty");
    }
    offsets_.push_back(total_);
    total_ += c.stored_size();
  }
}

Layout Layout::real(std::size_t n, std::string name) {
  return Layout({Component{std::move(name), n, false}});
}

Layout Layout::complex(std::size_t n, std::string name) {
  return Layout({Component{std::move(name), n, true}});
}

std::size_t Layout::offset(std::size_t component) const {
  if (component >= offsets_.size()) {
    throw DimensionError("layout has no component " + std::to_string(component));
  }
  return offsets_[component];
}

ParameterState::ParameterState(Vector values, Layout layout)
    : values_(std::move(values)), layout_(std::move(layout)) {
  if (static_cast<std::size_t>(values_.size()) != layout_.size()) {
    throw DimensionError("parameter vector has length " +
                         std::to_string(values_.size()) + " but layout needs " +
                         std::to_string(layout_.size()));
  }
}

ComplexVector ParameterState::complex_component(std::size_t component) const {
  const auto& c = layout_.components().at(component);
  if (!c.is_complex) {
    throw ValidationError("component '" + c.name + "' is real");
  }
  const auto off = static_cast<Eigen::Index>(layout_.offset(component));
  return unstack_complex(values_.segment(off, static_cast<Eigen::Index>(2 * c.count)));
}

Vector stack_complex(const ComplexVector& z) {
  const auto n = z.size();
  Vector out(2 * n);
  out.head(n) = z.real();
  out.tail(n) = z.imag();
  return out;
}

ComplexVector unstack_complex(const Eigen::Ref<const Vector>& stacked) {
  if (stacked.size() % 2 != 0) {
    throw DimensionError("stacked complex vector has odd length");
  }
  const auto n = stacked.size() / 2;
  ComplexVector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = Complex(stacked[i], stacked[n + i]);
  }
  return z;
}

}  // namespace rons
