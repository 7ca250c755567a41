#include "lungline/zoo.hpp"

namespace lungline::zoo {

const std::vector<ReferenceModel>& reference_models() {
  // Quoted sizes of the published models each comparison set reports
  // against. VGG16 appears once per set even where two sources quote the
  // same figures.
  static const std::vector<ReferenceModel> kModels = {
      {"three-class", "ResNet101", 44654504, 171},
      {"three-class", "InceptionV3", 24000000, 92},
      {"three-class", "Xception", 22910480, 88},
      {"three-class", "InstaCOV-Net-19", 54914918, std::nullopt},
      {"three-class", "VGG16", 138000000, 528},
      {"three-class", "COVID-NET", 11750000, std::nullopt},
      {"three-class", "ResNet50", 26000000, 99},
      {"three-class", "EfficientNetB0", 5300000, 29},
      {"three-class", "VGG19", 143667240, 549},

      {"covid-pneumonia", "InceptionV3", 24000000, 92},
      {"covid-pneumonia", "ResNet50", 26000000, 98},
      {"covid-pneumonia", "ResNet101", 44654504, 171},
      {"covid-pneumonia", "ResNet152", 60344232, 232},
      {"covid-pneumonia", "InceptionResNetV2", 55800000, 215},

      {"covid-normal", "ResNet34", 21500000, std::nullopt},
      {"covid-normal", "GoogLeNet", 7000000, 40},
      {"covid-normal", "AlexNet", 60000000, 217},
      {"covid-normal", "VGG16", 138000000, 528},
      {"covid-normal", "InceptionV3", 24000000, 92},
      {"covid-normal", "ResNet101", 44654504, 171},
      {"covid-normal", "Xception", 22910480, 88},
  };
  return kModels;
}

}  // namespace lungline::zoo
